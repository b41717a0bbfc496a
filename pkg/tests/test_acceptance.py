"""Acceptance criteria, one test per criterion, at the stated tolerances.

Each test prints one `[PASS]`/`[FAIL]` line per criterion (run with
``pytest -v -s tests/test_acceptance.py``).  Two sub-criteria are
implemented faithfully and fail with measured analysis because they are
numerically unattainable for this artifact (see the assertions'
messages): the 1/beta fixed-step run cannot reach tension 1e-8 within
five minutes (the explicit beta bound forces ~1e8 iterations), and the
cosh-center map's fixed point sits O(mesh^3) away from the harmonic map
at depth 2, far above the 1e-6 pairwise window.
"""

import time

import numpy as np
import pytest

from harmonicflow import flow as fl
from harmonicflow import geometry as geo
from harmonicflow import suites
from harmonicflow import verify as vf
from harmonicflow.errors import FlowNotConverged
from harmonicflow.pipeline import build_pipeline

PAPER_DOMAIN = ([2.0, 2.0, 0.5], [-1.5, 2.0, 0.5])
TARGET_15 = ([2.0, 2.0, 1.5], [-1.5, 2.0, 0.5])


def _report(name, passed, detail=""):
    print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
    return passed


def _assert_rows(criterion, rows):
    ok = all(r.passed for r in rows)
    detail = "; ".join(f"{r.name} [{r.detail}]" for r in rows if not r.passed) or rows[0].detail
    assert _report(criterion, ok, detail), detail


# ---------------------------------------------------------------------------


def test_geometry_oracle_suite():
    rows = suites.suite_geometry(seed=0)
    _assert_rows("geometry oracle suite (quadrilateral identity)", rows[:1])


def test_second_variation_suite():
    rows = suites.suite_geometry(seed=1)[1:]
    _assert_rows("second-variation suite (analytic vs FD, lower bound)", rows)


def test_barycenter_suite():
    t0 = time.time()
    rows = suites.suite_barycenter(seed=0)
    rows_ok = all(r.passed for r in rows) and time.time() - t0 < 30
    _report(
        "barycenter suite (cosh residual, gap bound, cubic slope)",
        rows_ok,
        "; ".join(r.detail for r in rows),
    )
    assert rows_ok


def test_representation_suite():
    rows = suites.suite_representation(seed=0)
    _assert_rows("representation suite (relator defect, curve traces)", rows)


def test_mesh_suite():
    rows = suites.suite_mesh(seed=0)
    _assert_rows("mesh suite (Euler, refinement counts, Gauss-Bonnet, weights > 0)", rows)


# ---------------------------------------------------------------------------
# convergence suite (paper configuration, depth 2)


@pytest.fixture(scope="module")
def depth2():
    pl = build_pipeline(
        2, PAPER_DOMAIN[0], PAPER_DOMAIN[1], TARGET_15[0], TARGET_15[1],
        depth=2, steiner_per_side=2,
    )
    return pl


@pytest.fixture(scope="module")
def harmonic_map(depth2):
    """Deeply converged harmonic map via center-of-mass averaging."""
    pl = depth2
    P = pl.f0_local.copy()
    iters = 0
    for iters in range(1, 60001):
        P = pl.engine.com_step(P, "karcher", inner_tol=1e-12)
        if iters % 50 == 0 and pl.engine.tension_norm(pl.engine.tension(P)) <= 1e-9:
            break
    tn = pl.engine.tension_norm(pl.engine.tension(P))
    assert tn <= 1e-8
    return P, iters


def test_convergence_suite_audits(depth2, harmonic_map):
    pl = depth2
    f_star, _ = harmonic_map
    e0 = pl.engine.energy(pl.f0_local)
    e_star = pl.engine.energy(f_star)
    cons = fl.convergence_constants(pl.stats, e0, E_star=e_star)
    t = 1.0 / cons.beta

    budget = 1_200_000
    cfg = fl.FlowConfig(
        method="fixed", stepsize=t, tolerance=1e-8,
        max_iterations=budget, snapshot_stride=100_000,
    )
    t0 = time.time()
    try:
        snaps, info = fl.run_flow(
            pl.engine, cfg, pl.f0_local, record_energy=True, distance_target=f_star
        )
    except FlowNotConverged as exc:
        snaps, info = exc.trajectory
    wall = time.time() - t0

    energies = np.array(info["energies"])
    strictly_decreasing = bool(np.all(np.diff(energies) < 0))
    ok1 = _report(
        "convergence suite: strictly decreasing energy at t = 1/beta",
        strictly_decreasing,
        f"{len(energies)} recorded energies, max increment "
        f"{np.diff(energies).max():.3e}",
    )

    dists = np.array(info["distances"])
    ks = np.arange(len(dists), dtype=float)
    bound = cons.c * cons.q**ks
    rate_ok = bool(np.all(dists <= bound + 1e-12))
    ok2 = _report(
        "convergence suite: d(f_k, f*) <= c q^k for every recorded iterate",
        rate_ok,
        f"c={cons.c:.3e} q={cons.q!r}, max ratio {(dists / bound).max():.3e}",
    )

    # barycenter characterization of the converged map
    moved = pl.engine.com_step(f_star, "karcher", inner_tol=1e-13)
    residual = pl.engine.map_distance(f_star, moved)
    ok3 = _report(
        "convergence suite: barycenter characterization residual <= 1e-6",
        residual <= 1e-6,
        f"residual {residual:.3e}",
    )

    # stash for the runtime criterion
    test_convergence_suite_audits.trace = (snaps, info, wall, cons, t)
    assert ok1 and ok2 and ok3


def test_convergence_suite_beta_step_runtime(depth2, harmonic_map):
    """Literal criterion: t = 1/beta reaches tension 1e-8 in < 5 min.

    Numerically unattainable: beta from the explicit bound is ~8e6 for
    this mesh (spiky fundamental polygon forces W/U and E0/Omega up), so
    1/beta ~ 1.2e-7 and the slow mode (~lambda_1 = 2) needs ~1.5e8
    iterations; the measured per-iteration wall cost makes that hours.
    Kept faithful and red; see the decisions ledger.
    """
    snaps, info, wall, cons, t = test_convergence_suite_audits.trace
    tnorms = np.array(info["tension_norms"])
    final_tension = tnorms[-1]
    if final_tension <= 1e-8:
        assert _report("convergence suite: tension 1e-8 at t = 1/beta in < 5 min", wall < 300)
        return
    # optimistic projection from the fastest recent decay
    half = len(tnorms) // 2
    rate = np.log(tnorms[half] / tnorms[-1]) / max(len(tnorms) - half, 1)
    need = np.log(final_tension / 1e-8) / max(rate, 1e-300)
    projected = wall * (need / max(len(tnorms), 1))
    detail = (
        f"budget {len(tnorms) - 1} iterations in {wall:.0f}s reached tension "
        f"{final_tension:.2e}; optimistic projection to 1e-8: {need:.2e} more "
        f"iterations ~ {projected:.0f}s (>> 300s); beta={cons.beta:.2e}, t={t:.2e}"
    )
    assert _report(
        "convergence suite: tension 1e-8 at t = 1/beta in < 5 min", False, detail
    ), detail


# ---------------------------------------------------------------------------
# method agreement suite (depth 2)


@pytest.fixture(scope="module")
def method_runs(depth2, harmonic_map):
    pl = depth2
    cons = pl.constants()
    runs = {}
    t0 = time.time()
    runs["fixed-1/beta"] = vf.run_method(
        pl, "fixed", 1e-8, 300_000, stepsize=1.0 / cons.beta
    )
    runs["fixed-practical"] = vf.run_method(
        pl, "fixed", 1e-8, None, stepsize=pl.engine.jacobi_stepsize()
    )
    runs["optimal"] = vf.run_method(pl, "optimal", 1e-8)
    runs["cosh-com"] = vf.run_method(pl, "cosh-com", 1e-10)
    # karcher with per-iteration energy recording for the monotonicity audit
    cfg = fl.FlowConfig(method="karcher-com", tolerance=1e-8, max_iterations=60_000,
                        snapshot_stride=5_000)
    snaps, info = fl.run_flow(pl.engine, cfg, pl.f0_local, record_energy=True)
    runs["karcher-com"] = vf.MethodRun(
        "karcher-com", snaps[-1].iteration, True, snaps[-1].points,
        snaps[-1].energy, snaps[-1].tension_norm,
    )
    runs["karcher-energies"] = np.array(info["energies"])
    runs["wall"] = time.time() - t0
    return runs


def test_method_agreement_suite(depth2, method_runs):
    pl = depth2
    runs = method_runs
    ok = True

    counts_fixed = runs["fixed-1/beta"].iterations  # budget-capped lower bound
    ok &= _report(
        "method agreement: optimal-step count <= fixed-step count",
        runs["optimal"].iterations <= counts_fixed,
        f"optimal {runs['optimal'].iterations} <= fixed(1/beta) > {counts_fixed} (budget cap)",
    )
    ok &= _report(
        "method agreement: cosh-com count <= fixed-step count",
        runs["cosh-com"].iterations <= counts_fixed,
        f"cosh {runs['cosh-com'].iterations} <= {counts_fixed}",
    )

    ens = runs["karcher-energies"]
    mono = bool(np.all(np.diff(ens) <= ens[:-1] * 1e-14 + 1e-15))
    ok &= _report(
        "method agreement: karcher-com energy non-increasing at every iteration",
        mono,
        f"{len(ens)} energies, max increment {np.diff(ens).max():.3e}",
    )

    trio = ["fixed-practical", "optimal", "karcher-com"]
    worst = 0.0
    for i in range(len(trio)):
        for j in range(i + 1, len(trio)):
            worst = max(
                worst,
                pl.engine.map_distance(runs[trio[i]].final_local, runs[trio[j]].final_local),
            )
    ok &= _report(
        "method agreement: converging methods pairwise within 1e-6 (L2(mu))",
        worst <= 1e-6,
        f"max pairwise distance {worst:.3e} over {trio}",
    )
    ok &= _report(
        "method agreement: runtime < 10 min at depth 2",
        runs["wall"] < 600,
        f"{runs['wall']:.0f}s",
    )
    assert ok


def test_method_agreement_cosh_pairwise(depth2, method_runs):
    """Literal criterion: cosh-com's final map within 1e-6 of the others.

    Unattainable at depth 2: the cosh-center fixed point differs from
    the harmonic map by the barycenter discrepancy at the neighbor scale
    (~0.4-0.6 here), i.e. O(r^3) ~ 1e-2, four orders above the window;
    agreement to 1e-6 would need mesh scales below ~1e-2 (depth >= 6).
    Kept faithful and red; see the decisions ledger.
    """
    pl = depth2
    runs = method_runs
    d = pl.engine.map_distance(runs["cosh-com"].final_local, runs["karcher-com"].final_local)
    detail = (
        f"d(cosh-com, karcher-com) = {d:.3e} (window 1e-6); neighbor distances "
        f"reach {_max_neighbor_distance(pl, runs['karcher-com'].final_local):.2f}, "
        f"and the cosh/Karcher barycenter gap scales as the cube of that"
    )
    assert _report(
        "method agreement: cosh-com final map within 1e-6 of the others", d <= 1e-6, detail
    ), detail


def _max_neighbor_distance(pl, P):
    q = pl.engine.neighbor_images(P)
    return float(geo.dist(P[pl.engine.dir_u], q).max())


# ---------------------------------------------------------------------------
# stepsize sweep and mean value


def test_stepsize_sweep_shape():
    t0 = time.time()
    res = vf.stepsize_sweep(
        PAPER_DOMAIN[0], PAPER_DOMAIN[1], TARGET_15[0], TARGET_15[1],
        stepsize_fractions=(0.2, 0.4, 0.6, 0.8, 1.0), depth=1,
    )
    wall = time.time() - t0
    counts = [e.iterations for e in res.entries]
    ok = all(e.converged for e in res.entries)
    ok &= all(counts[i] >= counts[i + 1] for i in range(len(counts) - 1))
    ok &= res.r_squared >= 0.9
    ok &= wall < 900
    assert _report(
        "stepsize sweep: counts non-increasing, -C1/log(1-C2 t) fit R^2 >= 0.9",
        ok,
        f"counts {counts}, R^2 {res.r_squared:.5f}, {wall:.0f}s",
    )


def test_mean_value_suite():
    t0 = time.time()
    rows = suites.suite_meanvalue(seed=0)
    wall = time.time() - t0
    ok = all(r.passed for r in rows) and wall < 120
    # the spec's slope window for the harmonic map is degenerate: the
    # defect is identically zero (rotational symmetry; harmonic-manifold
    # mean value property), so the suite asserts the pointwise O(r^4)
    # bound instead and certifies the quartic slope on the shear drift
    assert _report(
        "mean-value suite: harmonic defect <= min(1e-6, r^4); shear slope >= 3.7",
        ok,
        "; ".join(r.detail for r in rows),
    )
