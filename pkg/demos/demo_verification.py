"""Certification oracles: identities, variations, averaging asymptotics.

Run: python3 demos/demo_verification.py
"""

import numpy as np

from harmonicflow import geometry as geo
from harmonicflow import verify as vf

rng = np.random.default_rng(0)


def rand_pt(scale=0.7):
    v = rng.normal(size=2) * scale
    return geo.exp_map(geo.origin(), np.array([v[0], v[1], 0.0]))


print("== the four-point cosh identity ==")
worst = 0.0
for _ in range(1000):
    worst = max(worst, vf.quadrilateral_residual(*[rand_pt() for _ in range(4)]))
print(f"worst residual over 1000 random quadrilaterals: {worst:.2e}")

print("\n== variations of the half-squared distance ==")
a, b = rand_pt(), rand_pt()
u = geo.tangent_project(a, rng.normal(size=3))
v = geo.tangent_project(b, rng.normal(size=3))
p = vf.PairVariation(a, b, u, v)
analytic, fd, lower = vf.pair_second_variation(p)
print(f"analytic second derivative: {analytic:.9f}")
print(f"finite differences:         {fd:.9f}")
print(f"transported-difference lower bound: {lower:.9f}")
print(f"first-derivative check: {vf.first_variation_check(p):.2e}")

print("\n== ball averages and the generalized mean value property ==")
x = geo.disk_point([0.3, 0.2])
radii = [0.2, 0.14, 0.1, 0.07, 0.05]
for kind in ("isometry", "geodesic", "shear"):
    rep, vals = vf.mean_value_experiment(kind, x, radii)
    harmonic = geo.norm(vf.numeric_tension(vf.make_test_map(kind), x)) < 1e-5
    tag = "harmonic" if harmonic else "NOT harmonic"
    print(f"{kind:9s} ({tag}): defects {vals.min():.2e} .. {vals.max():.2e}, "
          f"log-log slope {rep.slope:.3f}")
print("harmonic maps give exact zeros here (constant curvature has the exact")
print("mean value property); the quartic order shows on the shear drift.")

f = vf.make_test_map("shear")
tau = vf.numeric_tension(f, x)
r = 0.02
coef = geo.dist(f(x), vf.ball_average(f, x, r)) / r**2
print(f"\nshear leading coefficient d(f, B_r f)/r^2 = {coef:.6f} vs |tau|/8 = "
      f"{geo.norm(tau) / 8:.6f}")
