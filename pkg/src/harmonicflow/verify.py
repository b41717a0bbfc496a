"""Numerical certification of the closed-form geometry and asymptotics.

Each oracle here is independent of the code path it checks: variation
formulas are compared against central finite differences of distances,
barycenter asymptotics against direct evaluation of both sides, and the
convergence experiments against recorded flow trajectories.
"""

from dataclasses import dataclass

import numpy as np

from . import flow as fl
from . import geometry as geo
from .errors import DegenerateQuadrilateral, FlowNotConverged, QuadratureFailed
from .pipeline import build_pipeline

# Centralized finite-difference steps: second derivatives balance
# truncation against cancellation at 1e-4; first derivatives at 1e-6.
FD_STEP_SECOND = 1e-4
FD_STEP_FIRST = 1e-6


# ---------------------------------------------------------------------------
# quadrilateral identity


def quadrilateral_residual(a, b, c, d):
    """|LHS - RHS| of the four-point cosh identity.

    The oriented angle alpha at A runs from the ray AB to the ray AD,
    beta at B from the ray BC to the ray BA; both may be negative or
    obtuse.
    """
    ab, da, bc, dc = geo.dist(a, b), geo.dist(d, a), geo.dist(b, c), geo.dist(d, c)
    if ab < 1e-12:
        # the angles alpha, beta are measured against the side AB
        raise DegenerateQuadrilateral("the side AB collapsed")
    alpha = geo.oriented_angle(a, geo.log_map(a, b), geo.log_map(a, d))
    beta = geo.oriented_angle(b, geo.log_map(b, c), geo.log_map(b, a))
    rhs = (
        np.cosh(ab) * (np.cosh(da) * np.cosh(bc) + np.sinh(da) * np.sinh(bc) * np.cos(alpha) * np.cos(beta))
        - np.sinh(ab) * (np.cosh(da) * np.sinh(bc) * np.cos(beta) + np.sinh(da) * np.cosh(bc) * np.cos(alpha))
        - np.sinh(da) * np.sinh(bc) * np.sin(alpha) * np.sin(beta)
    )
    return float(abs(np.cosh(dc) - rhs))


# ---------------------------------------------------------------------------
# pair variations


@dataclass
class PairVariation:
    """Two points with tangent vectors: the setup of the second-variation
    formulas for the half-squared-distance of a moving pair."""

    a: np.ndarray
    b: np.ndarray
    u: np.ndarray  # tangent at a
    v: np.ndarray  # tangent at b

    def __post_init__(self):
        geo.check_tangent(self.a, self.u, tol=1e-8)
        geo.check_tangent(self.b, self.v, tol=1e-8)


def _pair_angles(p):
    """(D, |u|, |v|, alpha, beta): angles against the travel direction."""
    d = geo.dist(p.a, p.b)
    nu, nv = geo.norm(p.u), geo.norm(p.v)
    dir_a = geo.log_map(p.a, p.b)  # points toward b
    dir_b = -geo.log_map(p.b, p.a)  # continuation of the same geodesic
    alpha = geo.oriented_angle(p.a, dir_a, p.u) if nu > 0 else 0.0
    beta = geo.oriented_angle(p.b, dir_b, p.v) if nv > 0 else 0.0
    return d, nu, nv, alpha, beta


def _pair_distance(p, t):
    return geo.dist(geo.exp_map(p.a, t * p.u), geo.exp_map(p.b, t * p.v))


def pair_second_variation(p):
    """(analytic, finite_diff, lower_bound) for E(t) = d(A_t, B_t)^2 / 2.

    analytic = a + b D tanh(D/2) + c (D coth D - D tanh(D/2)) with the
    angle coefficients of the displayed formula; finite_diff is the
    central second difference; lower_bound = |u - P_[BA] v|^2.
    """
    d, nu, nv, alpha, beta = _pair_angles(p)
    a_c = (nu * np.cos(alpha) - nv * np.cos(beta)) ** 2
    b_c = nu**2 * np.sin(alpha) ** 2 + nv**2 * np.sin(beta) ** 2
    c_c = (nu * np.sin(alpha) - nv * np.sin(beta)) ** 2
    analytic = a_c + b_c * d * np.tanh(d / 2.0) + c_c * (d / np.tanh(d) - d * np.tanh(d / 2.0))
    h = FD_STEP_SECOND
    e = lambda t: 0.5 * _pair_distance(p, t) ** 2
    finite = (e(h) - 2.0 * e(0.0) + e(-h)) / (h * h)
    moved = geo.parallel_transport(p.v, p.b, p.a)
    lower = float(geo.minkowski(p.u - moved, p.u - moved))
    return float(analytic), float(finite), lower


def first_variation_check(p):
    """Max deviation of the analytic first derivatives of F and E from
    central differences (F = cosh(d) - 1, E = d^2/2)."""
    d, nu, nv, alpha, beta = _pair_angles(p)
    df_analytic = -np.sinh(d) * (nu * np.cos(alpha) - nv * np.cos(beta))
    de_analytic = -d * (nu * np.cos(alpha) - nv * np.cos(beta))
    h = FD_STEP_FIRST
    f = lambda t: np.cosh(_pair_distance(p, t)) - 1.0
    e = lambda t: 0.5 * _pair_distance(p, t) ** 2
    df_fd = (f(h) - f(-h)) / (2.0 * h)
    de_fd = (e(h) - e(-h)) / (2.0 * h)
    return float(max(abs(df_analytic - df_fd), abs(de_analytic - de_fd)))


# ---------------------------------------------------------------------------
# ball averages and the mean value property


@dataclass
class ScalingReport:
    radii: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float

    def __post_init__(self):
        self.radii = np.asarray(self.radii, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if np.any(np.diff(self.radii) >= 0):
            raise ValueError("radii must be strictly decreasing")
        if np.any(self.values <= 0):
            raise ValueError("values must be positive for a log-log fit")


def fit_scaling(radii, values, drop_contaminated=True):
    """Log-log regression; optionally drops the largest radius when its
    residual exceeds three times the fit residual (higher-order terms)."""
    radii = np.asarray(radii, dtype=float)
    values = np.asarray(values, dtype=float)

    def regress(r, v):
        x, y = np.log(r), np.log(v)
        slope, intercept = np.polyfit(x, y, 1)
        res = y - (slope * x + intercept)
        return slope, intercept, res

    slope, intercept, res = regress(radii, values)
    rms = float(np.sqrt(np.mean(res**2)))
    if drop_contaminated and len(radii) > 5 and abs(res[0]) > 3 * rms:
        slope, intercept, res = regress(radii[1:], values[1:])
        rms = float(np.sqrt(np.mean(res**2)))
        return ScalingReport(radii[1:], values[1:], float(slope), float(intercept), rms)
    return ScalingReport(radii, values, float(slope), float(intercept), rms)


def _shear_halfplane(p):
    xy = geo.halfplane_coords(p)
    return geo.halfplane_point(np.stack([xy[..., 0] + xy[..., 1], xy[..., 1]], axis=-1))


def _geodesic_valued(p):
    # gamma(u) with u = Re(z): a closed-form harmonic, non-isometric map
    # (harmonic function composed with a unit-speed geodesic)
    xy = geo.halfplane_coords(p)
    x = xy[..., 0]
    out = np.zeros(p.shape)
    out[..., 0] = 0.0
    out[..., 1] = np.sinh(x)
    out[..., 2] = np.cosh(x)
    return out


def make_test_map(kind):
    """Closed-form test maps: 'isometry' and 'geodesic' are harmonic,
    'shear' is not."""
    if kind == "isometry":
        g = geo.Isometry(np.array([[1.2, 0.3], [0.1, (1.0 + 0.03) / 1.2]]))
        return g.apply
    if kind == "geodesic":
        return _geodesic_valued
    if kind == "shear":
        return _shear_halfplane
    raise ValueError(f"unknown map kind {kind!r}")


def ball_average(f, x, r, tol=1e-11, sphere=False):
    """Karcher barycenter of f over exp_x(ball of radius r) with the
    normalized Lebesgue measure of the tangent plane.

    Deterministic polar quadrature (Gauss-Legendre radial nodes times a
    uniform angular grid) refined until the barycenter moves less than
    ``tol``.  With ``sphere=True`` averages over the circle of radius r
    instead of the disk.
    """
    e1, e2 = geo.tangent_basis(x)
    prev = None
    n = 8
    while n <= 128:
        m = 4 * n
        theta = 2.0 * np.pi * np.arange(m) / m
        if sphere:
            radii = np.array([r])
            wr = np.array([1.0])
        else:
            nodes, wts = np.polynomial.legendre.leggauss(n)
            radii = 0.5 * r * (nodes + 1.0)
            wr = wts * radii  # Lebesgue radial density s ds
        pts = []
        wgt = []
        for s, w in zip(radii, wr):
            vecs = s * (np.cos(theta)[:, None] * e1 + np.sin(theta)[:, None] * e2)
            pts.append(f(geo.exp_map(np.broadcast_to(x, (m, 3)), vecs)))
            wgt.append(np.full(m, w))
        pts = np.concatenate(pts)
        wgt = np.concatenate(wgt)
        pset = geo.WeightedPointSet(pts, wgt / wgt.sum())
        bary = geo.karcher_barycenter(pset, tol=tol / 10.0)
        if prev is not None and geo.dist(prev, bary) < tol:
            return bary
        prev = bary
        n *= 2
    raise QuadratureFailed(f"ball average did not stabilize below {tol:g}")


def numeric_tension(f, x, h=1e-3):
    """Finite-difference trace of the vector-valued Hessian of f at x."""
    e1, e2 = geo.tangent_basis(x)
    fx = f(x)
    out = np.zeros(3)
    for e in (e1, e2):
        plus = f(geo.exp_map(x, h * e))
        minus = f(geo.exp_map(x, -h * e))
        out = out + (geo.log_map(fx, plus) + geo.log_map(fx, minus)) / (h * h)
    return out


def mean_value_experiment(map_kind, x, radii, sphere=False):
    """Scaling of the ball-average defect for a test map.

    Harmonic kinds ('isometry', 'geodesic') report d(f(x), B_r f(x)); the
    non-harmonic 'shear' reports the defect against the predicted drift
    exp_{f(x)}(r^2/8 tau) with tau estimated by finite differences (for
    the sphere average the coefficient is r^2/4).
    """
    f = make_test_map(map_kind)
    radii = np.asarray(sorted(radii, reverse=True), dtype=float)
    if len(radii) < 5 or radii.max() > 0.5:
        raise ValueError("need at least 5 radii within (0, 0.5]")
    values = []
    coeff = 0.25 if sphere else 0.125  # r^2/(2m) vs r^2/(2(m+2)), m = 2
    tau = numeric_tension(f, x) if map_kind == "shear" else None
    for r in radii:
        avg = ball_average(f, x, r, sphere=sphere)
        if map_kind == "shear":
            predicted = geo.exp_map(f(x), coeff * r * r * tau)
            values.append(geo.dist(avg, predicted))
        else:
            values.append(geo.dist(f(x), avg))
    values = np.array(values)
    floor = 1e-12  # quadrature/solver noise floor for exact-zero defects
    return fit_scaling(radii, np.maximum(values, floor)), values


# ---------------------------------------------------------------------------
# flow experiments


@dataclass
class SweepEntry:
    stepsize: float
    iterations: int
    converged: bool


@dataclass
class SweepResult:
    entries: list
    c1: float
    c2: float
    r_squared: float


def profile_fit(stepsizes, counts):
    """Least-squares fit of counts ~ -C1 / log(1 - C2 t).

    C1 enters linearly, so the fit scans C2 over a grid below 1/max(t)
    and solves for C1 in closed form; returns (C1, C2, R^2).
    """
    t = np.asarray(stepsizes, dtype=float)
    k = np.asarray(counts, dtype=float)
    best = None
    for c2 in np.linspace(1e-6 / t.max(), 0.999999 / t.max(), 4000):
        g = -1.0 / np.log1p(-c2 * t)
        c1 = float(np.dot(k, g) / np.dot(g, g))
        ss_res = float(np.sum((k - c1 * g) ** 2))
        if best is None or ss_res < best[0]:
            best = (ss_res, c1, c2)
    ss_tot = float(np.sum((k - k.mean()) ** 2))
    r2 = 1.0 - best[0] / ss_tot if ss_tot > 0 else 1.0
    return best[1], best[2], r2


def stepsize_sweep(
    domain_lengths,
    domain_twists,
    target_lengths,
    target_twists,
    stepsize_fractions=(0.2, 0.4, 0.6, 0.8, 1.0),
    genus=2,
    depth=1,
    steiner_per_side=2,
    tolerance_factor=30.0,
    max_iterations=30_000_000,
):
    """Iteration counts of the fixed-step flow against the stepsize.

    Stepsizes are the given fractions of 1/beta (the provably safe
    range); counts measure iterations until the tension norm falls below
    initial/tolerance_factor.  Divergence is recorded, not raised.
    """
    pl = build_pipeline(
        genus, domain_lengths, domain_twists, target_lengths, target_twists,
        depth=depth, steiner_per_side=steiner_per_side,
    )
    cons = pl.constants()
    tau0 = pl.engine.tension_norm(pl.engine.tension(pl.f0_local))
    tol = tau0 / tolerance_factor
    entries = []
    for frac in stepsize_fractions:
        t = frac / cons.beta
        cfg = fl.FlowConfig(
            method="fixed", stepsize=t, tolerance=tol,
            max_iterations=max_iterations, snapshot_stride=250_000,
        )
        try:
            snaps, _ = fl.run_flow(pl.engine, cfg, pl.f0_local)
            entries.append(SweepEntry(t, snaps[-1].iteration, True))
        except FlowNotConverged as exc:
            snaps, _ = exc.trajectory
            entries.append(SweepEntry(t, snaps[-1].iteration, False))
    good = [e for e in entries if e.converged]
    c1, c2, r2 = profile_fit([e.stepsize for e in good], [e.iterations for e in good])
    return SweepResult(entries, c1, c2, r2)


@dataclass
class MethodRun:
    method: str
    iterations: int
    converged: bool
    final_local: np.ndarray
    final_energy: float
    final_tension: float


def run_method(pl, method, tolerance=1e-8, max_iterations=None, stepsize=None):
    """One method on a built pipeline; cosh-com counts iterations until
    its own fixed point (map increment below tolerance) since its limit
    is not the energy minimizer."""
    cons = pl.constants()
    engine = pl.engine
    if method == "cosh-com":
        P = pl.f0_local.copy()
        cap = max_iterations or 200_000
        for k in range(cap):
            Q = engine.com_step(P, "cosh")
            inc = engine.map_distance(P, Q)
            P = Q
            if inc <= tolerance:
                break
        tau = engine.tension_norm(engine.tension(P))
        return MethodRun("cosh-com", k + 1, inc <= tolerance, P, engine.energy(P), tau)
    cfg = fl.FlowConfig(
        method=method,
        stepsize=stepsize,
        tolerance=tolerance,
        max_iterations=max_iterations or 5_000_000,
        snapshot_stride=100_000,
    )
    cfg._beta = cons.beta
    try:
        snaps, _ = fl.run_flow(engine, cfg, pl.f0_local)
        s = snaps[-1]
        return MethodRun(method, s.iteration, True, s.points, s.energy, s.tension_norm)
    except FlowNotConverged as exc:
        snaps, _ = exc.trajectory
        s = snaps[-1]
        return MethodRun(method, s.iteration, False, s.points, s.energy, s.tension_norm)


def method_comparison(
    domain_lengths,
    domain_twists,
    target_family,
    genus=2,
    depth=1,
    steiner_per_side=2,
    tolerance=1e-8,
    fixed_budget=2_000_000,
):
    """Iteration counts of the three methods per target family member.

    The fixed-step column runs at the provable stepsize 1/beta with an
    iteration budget (its true count exceeds the budget when flagged not
    converged); 'fixed-practical' runs at the stiffness-stable step and
    converges, providing the fixed-step final map.
    """
    table = {}
    for lengths, twists in target_family:
        pl = build_pipeline(
            genus, domain_lengths, domain_twists, lengths, twists,
            depth=depth, steiner_per_side=steiner_per_side,
        )
        runs = {
            "fixed": run_method(
                pl, "fixed", tolerance, fixed_budget, stepsize=1.0 / pl.constants().beta
            ),
            "fixed-practical": run_method(
                pl, "fixed", tolerance, None, stepsize=pl.engine.jacobi_stepsize()
            ),
            "optimal": run_method(pl, "optimal", tolerance),
            "karcher-com": run_method(pl, "karcher-com", tolerance),
            "cosh-com": run_method(pl, "cosh-com", 1e-10),
        }
        table[tuple(lengths)] = (pl, runs)
    return table
