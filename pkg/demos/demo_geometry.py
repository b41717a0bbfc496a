"""Tour of the hyperboloid-model geometry core.

Run: python3 demos/demo_geometry.py
"""

import numpy as np

from harmonicflow import geometry as geo

print("== points and distances ==")
a = geo.halfplane_point([0.0, 1.0])  # the half-plane point i
b = geo.halfplane_point([0.0, 2.0])  # 2i
print(f"hyperboloid coords of i:  {a}")
print(f"hyperboloid coords of 2i: {b}")
print(f"dist(i, 2i) = {geo.dist(a, b):.15f}  (log 2 = {np.log(2):.15f})")

print("\n== exp, log, transport ==")
v = np.array([0.6, 0.25, 0.0])
p = geo.exp_map(geo.origin(), v)
print(f"exp from the origin with |v| = {geo.norm(v):.6f} lands at distance "
      f"{geo.dist(geo.origin(), p):.6f}")
w = geo.log_map(p, a)
print(f"log/exp round trip error: {np.abs(geo.exp_map(p, w) - a).max():.2e}")
moved = geo.parallel_transport(w, p, b)
print(f"transport preserves norms: {geo.norm(w):.12f} -> {geo.norm(moved):.12f}")

print("\n== triangles ==")
c = geo.exp_map(geo.origin(), np.array([-0.2, 0.7, 0.0]))
angles, area = geo.triangle_angles_area(a, p, c)
print(f"angles: {[round(x, 6) for x in angles]}")
print(f"angle defect area: {area:.12f} vs side-length formula "
      f"{geo.triangle_area(a, p, c):.12f}")

print("\n== barycenters ==")
pts = np.stack([a, b, c])
pset = geo.WeightedPointSet(pts, np.array([0.5, 0.25, 0.25]))
k = geo.karcher_barycenter(pset, tol=1e-12)
q = geo.cosh_barycenter(pset)
print(f"karcher barycenter residual: {geo.karcher_residual(k, pset):.2e}")
print(f"cosh barycenter residual:    {geo.cosh_residual(q, pset):.2e}")
print(f"the two barycenters are {geo.dist(k, q):.6f} apart at this spread")

print("\nscaling the same configuration into a ball of radius r:")
center = geo.origin()
dirs = [geo.tangent_project(center, d) for d in np.random.default_rng(1).normal(size=(4, 3))]
dirs = [d / geo.norm(d) for d in dirs]
for r in (0.2, 0.02, 0.002):
    pset = geo.WeightedPointSet(np.stack([geo.exp_map(center, r * d) for d in dirs]))
    gap = geo.dist(geo.karcher_barycenter(pset, tol=1e-15), geo.cosh_barycenter(pset))
    print(f"  r = {r:<6g} karcher-vs-cosh gap = {gap:.3e}  (~ r^3)")
