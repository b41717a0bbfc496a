"""End-to-end pipeline checks beyond the paper configuration."""

import numpy as np

from harmonicflow import flow as fl
from harmonicflow import geometry as geo
from harmonicflow import meshing as ms
from harmonicflow.pipeline import build_pipeline


def test_genus3_pipeline_end_to_end():
    pl = build_pipeline(
        3,
        [1.5, 1.2, 1.8, 1.0, 1.3, 0.9],
        [0.3, -0.4, 0.2, 0.1, -0.2, 0.5],
        [1.2, 1.5, 1.4, 1.1, 1.0, 1.2],
        [0.1, 0.2, -0.3, 0.4, 0.0, -0.1],
        depth=1,
        steiner_per_side=1,
    )
    edges, _ = ms.quotient_edges(pl.mesh)
    chi = len(pl.mesh.vertices) - len(edges) + len(pl.mesh.triangles)
    assert chi == 2 - 2 * 3
    assert abs(pl.graph.mu.sum() - 8 * np.pi) < 1e-6  # Gauss-Bonnet, genus 3
    assert pl.graph.omega.min() > 0
    ms.validate_mesh(pl.mesh)
    cfg = fl.FlowConfig(method="karcher-com", tolerance=1e-8, max_iterations=100_000,
                        snapshot_stride=10_000)
    snaps, _ = fl.run_flow(pl.engine, cfg, pl.f0_local)
    assert snaps[-1].tension_norm <= 1e-8


def test_gradient_consistency_across_states():
    # -tau equals the L2(mu) energy gradient at several random states
    pl = build_pipeline(2, [2, 2, 0.5], [-1.5, 2, 0.5], [2, 2, 1.5], [-1.5, 2, 0.5],
                        depth=0, steiner_per_side=1)
    rng = np.random.default_rng(17)
    P = pl.f0_local.copy()
    h = 1e-5
    for state in range(10):
        tau = pl.engine.tension(P)
        for _ in range(3):
            V = np.stack([geo.tangent_project(P[i], rng.normal(size=3)) for i in range(len(P))])
            V = V / pl.engine.tension_norm(V)
            fd = (
                pl.engine.energy(geo.exp_map(P, h * V))
                - pl.engine.energy(geo.exp_map(P, -h * V))
            ) / (2 * h)
            ip = -float(np.dot(pl.graph.mu, geo.minkowski(tau, V)))
            assert abs(fd - ip) / max(1.0, abs(fd)) <= 1e-5
        # hop to a new random state
        W = np.stack([geo.tangent_project(P[i], rng.normal(size=3)) for i in range(len(P))])
        P = geo.exp_map(P, 0.05 * W)
