"""The three minimization methods on one configuration.

Run: python3 demos/demo_flow.py
"""

import time

import numpy as np

from harmonicflow import flow as fl
from harmonicflow.pipeline import build_pipeline

print("building the pipeline (genus 2, depth 1) ...")
pl = build_pipeline(2, [2, 2, 0.5], [-1.5, 2, 0.5], [2, 2, 1.5], [-1.5, 2, 0.5], depth=1)
cons = pl.constants()
print(f"vertex orbits: {pl.graph.num_vertices}")
print(f"explicit constants: alpha = {cons.alpha:.3e}, beta = {cons.beta:.3e}, "
      f"q(1/beta) = {cons.q!r}")
print(f"initial energy {pl.engine.energy(pl.f0_local):.6f}, "
      f"initial tension {pl.engine.tension_norm(pl.engine.tension(pl.f0_local)):.3f}")

results = {}
for method, kwargs in (
    ("fixed", dict(stepsize=pl.engine.jacobi_stepsize())),
    ("optimal", {}),
    ("karcher-com", {}),
):
    cfg = fl.FlowConfig(method=method, tolerance=1e-8, max_iterations=200_000,
                        snapshot_stride=20_000, **kwargs)
    cfg._beta = cons.beta
    t0 = time.time()
    snaps, _ = fl.run_flow(pl.engine, cfg, pl.f0_local)
    results[method] = snaps[-1]
    print(f"{method:12s} {snaps[-1].iteration:>7d} iterations  "
          f"E* = {snaps[-1].energy:.12f}  ({time.time() - t0:.1f}s)")

print("\nthe three final maps coincide:")
keys = list(results)
for i in range(len(keys)):
    for j in range(i + 1, len(keys)):
        d = pl.engine.map_distance(results[keys[i]].points, results[keys[j]].points)
        print(f"  L2(mu) distance {keys[i]} vs {keys[j]}: {d:.2e}")

print("\ncosh-averaging converges to its own fixed point nearby:")
P = pl.f0_local.copy()
for k in range(5000):
    Q = pl.engine.com_step(P, "cosh")
    if pl.engine.map_distance(P, Q) < 1e-10:
        P = Q
        break
    P = Q
d = pl.engine.map_distance(P, results["karcher-com"].points)
print(f"  {k + 1} iterations; distance to the harmonic map {d:.2e} "
      f"(the O(mesh^3) barycenter gap)")
