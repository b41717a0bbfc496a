"""Discrete energy, tension field, and the minimization iterations.

An equivariant map is stored as one hyperboloid point per vertex orbit of
the domain graph; evaluation at a translated vertex goes through the
target representation, so equivariance is structural.  The energy is the
half sum of cotangent-weighted squared distances over the edge orbits,
the tension field its negative gradient in the L^2(mu) metric, and the
three iterations (fixed-stepsize heat flow, optimal-stepsize heat flow,
center-of-mass averaging) all update every vertex simultaneously from
the previous state.

Numerics: fundamental polygons of hyperbolic surfaces reach Minkowski
coordinates e^{O(diameter)}, where raw float64 edge-matrix applications
would inject 1e-7-level noise, drowning tension tolerances of 1e-8.  The
engine therefore conjugates every vertex into a local frame anchored at
its initial image (base-change matrices computed in extended precision
once); within local frames all coordinates stay O(1) and plain float64
suffices.  Distances between two maps and all energies are frame
invariant, so nothing else changes.
"""

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .errors import (
    BarycenterDiverged,
    FlowNotConverged,
    InitialMapMismatch,
    LineSearchFailed,
    StepsizeOutOfRange,
)
from .meshing import _RhoCache, geodesic_interpolate, optimize_fundamental_polygon
from .surface import word_inverse

try:  # numba accelerates the fixed-step inner loop; numpy path is equivalent
    import numba

    HAVE_NUMBA = True
except Exception:  # pragma: no cover
    HAVE_NUMBA = False

METHODS = ("fixed", "optimal", "karcher-com", "cosh-com")


@dataclass
class FlowConfig:
    method: str = "fixed"
    stepsize: float = None  # fixed method only; defaults to 1/beta
    tolerance: float = 1e-8
    max_iterations: int = 5_000_000
    snapshot_stride: int = 1000

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.stepsize is not None and self.stepsize <= 0:
            raise ValueError("stepsize must be positive")


@dataclass
class FlowState:
    """Snapshot of the flow: the map plus scalar diagnostics."""

    points: np.ndarray  # (n, 3) global hyperboloid images of the orbit reps
    iteration: int
    energy: float
    tension_norm: float
    last_stepsize: float
    method: str


@dataclass
class ConvergenceConstants:
    alpha: float
    beta: float
    c: float
    q: float


def convergence_constants(stats, E0, t=None, E_star=0.0):
    """Explicit convexity bounds and the resulting linear rate.

    alpha is the strong-convexity modulus from the quotient-graph data,
    beta the Hessian bound on the sublevel set {E <= E0}, c the distance
    coefficient from the initial energy gap, and q the per-iteration
    contraction factor for stepsize t (defaults to 1/beta).
    """
    alpha = 1.0 / (9.0 * stats.A * (1.0 + np.sqrt(stats.D / stats.Omega)) ** 2)
    x = np.sqrt(E0 / stats.Omega)
    beta = (2.0 * stats.maxvalence * stats.W / stats.U) * (
        1.0 + (x / np.tanh(x) if x > 1e-12 else 1.0)
    )
    if t is None:
        t = 1.0 / beta
    if t > 1.0 / beta + 1e-15:
        raise StepsizeOutOfRange(f"stepsize {t} exceeds 1/beta = {1.0 / beta:.3e}")
    c = np.sqrt(max(2.0 / alpha * (E0 - E_star), 0.0))
    q = np.sqrt(1.0 - (t / 2.0) * alpha * (1.0 + alpha / beta))
    return ConvergenceConstants(float(alpha), float(beta), float(c), float(q))


# ---------------------------------------------------------------------------
# initial map


def initial_map(mesh, rep_target):
    """Transport the domain mesh combinatorics to the target structure.

    Polygon corners map to the corners of the target polygon, Steiner
    points to evenly spaced points on the matched target side, and every
    refinement midpoint to the midpoint of its parents' images (the
    refinement tree replay).  Returns (points, target polygon).
    """
    poly_y = optimize_fundamental_polygon(rep_target, mesh.group)
    rho_y = _RhoCache(rep_target, mesh.group.labels)
    n_sides = poly_y.num_sides
    points = np.zeros((len(mesh.vertices), 3))
    for i, mv in enumerate(mesh.vertices):
        if mv.tag == "corner":
            points[i] = poly_y.base
        elif mv.tag == "side":
            k, frac = mv.side_info
            a = poly_y.vertices[k]
            b = poly_y.vertices[(k + 1) % n_sides]
            points[i] = geodesic_interpolate(a, b, frac)
        elif mv.tag == "midpoint":
            u, v, w = mv.parents
            if u >= i or v >= i:
                raise InitialMapMismatch("midpoint parents out of construction order")
            points[i] = geo.midpoint(points[u], rho_y.point(w, points[v]))
        else:  # pragma: no cover
            raise InitialMapMismatch(f"unknown vertex tag {mv.tag!r}")
    return points, poly_y


# ---------------------------------------------------------------------------
# engine


def _center_matrix_ld(p):
    """Longdouble 2x2 mapping the point p to the hyperboloid origin."""
    p = np.asarray(p, dtype=np.longdouble)
    s = np.array([[p[2] + p[1], p[0]], [p[0], p[2] - p[1]]], dtype=np.longdouble)
    root = (s + np.eye(2, dtype=np.longdouble)) / np.sqrt(s[0, 0] + s[1, 1] + 2.0)
    return np.array([[root[1, 1], -root[0, 1]], [-root[1, 0], root[0, 0]]])


def _mink3_ld(m):
    a, b, c, d = m.ravel()
    cols = []
    for s11, s12, s22 in ((0.0, 1.0, 0.0), (1.0, 0.0, -1.0), (1.0, 0.0, 1.0)):
        t11 = a * a * s11 + 2.0 * a * b * s12 + b * b * s22
        t12 = a * c * s11 + (a * d + b * c) * s12 + b * d * s22
        t22 = c * c * s11 + 2.0 * c * d * s12 + d * d * s22
        cols.append([t12, (t11 - t22) / 2.0, (t11 + t22) / 2.0])
    return np.array(cols, dtype=np.longdouble).T


def _apply_mink_ld(m3, pts):
    out = np.asarray(pts, dtype=np.longdouble) @ m3.T
    q = -(out[..., 0] ** 2 + out[..., 1] ** 2 - out[..., 2] ** 2)
    return np.asarray(out / np.sqrt(q)[..., None], dtype=float)


class FlowEngine:
    """Vectorized evaluator of energy, tension, and flow steps.

    Bound to one domain graph and one target representation; the map
    state is an (n, 3) array in per-vertex local frames.  Use
    `localize` / `globalize` to convert from and to global coordinates.
    """

    def __init__(self, graph, rep_target, labels, anchor_points=None):
        self.graph = graph
        self.mu = graph.mu.copy()
        self.n = graph.num_vertices
        rho = _RhoCache(rep_target, labels)

        # local frames anchored at the initial images
        if anchor_points is None:
            eye = np.eye(2, dtype=np.longdouble)
            self._bases = [eye] * self.n
        else:
            self._bases = [_center_matrix_ld(p) for p in np.asarray(anchor_points, float)]
        self._bases_inv = [
            np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]]) for m in self._bases
        ]
        self._mink = [_mink3_ld(m) for m in self._bases]
        self._mink_inv = [_mink3_ld(m) for m in self._bases_inv]

        eu, ev, mats = [], [], []
        du, dv, dmats, dom = [], [], [], []
        for i, (u, v, w) in enumerate(graph.edges):
            eu.append(u)
            ev.append(v)
            m = rho.matrix_ld(w)
            mats.append(self._edge_matrix(u, m, v))
            for (a, b, mm, ww) in ((u, v, m, w), (v, u, None, word_inverse(w))):
                if mm is None:
                    mm = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
                du.append(a)
                dv.append(b)
                dmats.append(self._edge_matrix(a, mm, b))
                dom.append(graph.omega[i])
        self.edge_u = np.array(eu, dtype=np.int64)
        self.edge_v = np.array(ev, dtype=np.int64)
        self.edge_m = np.stack(mats)
        self.omega = graph.omega.copy()
        self.dir_u = np.array(du, dtype=np.int64)
        self.dir_v = np.array(dv, dtype=np.int64)
        self.dir_m = np.stack(dmats)
        self.dir_om = np.array(dom)

    def _edge_matrix(self, u, m_ld, v):
        """float64 Minkowski matrix of B_u rho(w) B_v^{-1} (local frames)."""
        m = self._bases[u] @ m_ld @ self._bases_inv[v]
        return np.asarray(_mink3_ld(m), dtype=float)

    # -- frame conversion ---------------------------------------------------

    def localize(self, global_points):
        out = np.empty_like(np.asarray(global_points, dtype=float))
        for i in range(self.n):
            out[i] = _apply_mink_ld(self._mink[i], global_points[i])
        return out

    def globalize(self, local_points):
        out = np.empty_like(np.asarray(local_points, dtype=float))
        for i in range(self.n):
            out[i] = _apply_mink_ld(self._mink_inv[i], local_points[i])
        return out

    # -- core evaluations ----------------------------------------------------

    def neighbor_images(self, P):
        """rho(gamma_e) f(v_e) in the frame of u_e, per directed edge."""
        return np.einsum("eij,ej->ei", self.dir_m, P[self.dir_v])

    def energy(self, P):
        q = np.einsum("eij,ej->ei", self.edge_m, P[self.edge_v])
        d = geo.dist(P[self.edge_u], q)
        return 0.5 * float(np.dot(self.omega, d * d))

    def tension(self, P):
        """Discrete tension field, one tangent vector per vertex (local)."""
        if HAVE_NUMBA:
            tau = np.empty_like(P)
            _tension_kernel(P, self.dir_u, self.dir_v, self.dir_m, self.dir_om, self.mu, tau)
            return tau
        x = P[self.dir_u]
        q = self.neighbor_images(P)
        logs = geo.log_map(x, q)
        tau = np.zeros_like(P)
        np.add.at(tau, self.dir_u, self.dir_om[:, None] * logs)
        return tau / self.mu[:, None]

    def tension_norm(self, tau):
        """L^2(mu) norm of a tangent field."""
        return float(np.sqrt(np.dot(self.mu, geo.minkowski(tau, tau))))

    def map_distance(self, P, Q):
        """L^2(mu) distance between two maps (local coordinates)."""
        d = geo.dist(P, Q)
        return float(np.sqrt(np.dot(self.mu, d * d)))

    # -- steps ----------------------------------------------------------------

    def step_fixed(self, P, t):
        """One Jacobi heat-flow step with stepsize t; returns the new map."""
        tau = self.tension(P)
        return geo.exp_map(P, t * tau), tau

    def jacobi_stepsize(self):
        """1 / max_x(sum_y omega_xy / mu_x): the stiffness-stable step.

        This is the scale at which one heat-flow step moves a vertex to
        (roughly) the weighted average of its neighbors; the explicit
        convexity bound beta is usually far more conservative.
        """
        wsum = np.zeros(self.n)
        np.add.at(wsum, self.dir_u, self.dir_om)
        return float(1.0 / (wsum / self.mu).max())

    def step_from_tension(self, P, tau, t):
        return geo.exp_map(P, t * tau)

    def _phi_prime(self, P, tau, t):
        """d/dt E(exp_P(t tau)): exact, free of value cancellation.

        The velocity of the geodesic family at time t is the parallel
        transport of tau along itself, so phi'(t) is minus the L^2(mu)
        pairing of the stepped map's tension with the transported
        direction.
        """
        Q = self.step_from_tension(P, tau, t)
        tau_q = self.tension(Q)
        moved = geo.parallel_transport(tau, P, Q)
        return -float(np.dot(self.mu, geo.minkowski(tau_q, moved)))

    def optimal_stepsize(self, P, tau, beta, max_evals=80, t_init=None):
        """Line-search minimizer of phi(t) = E(exp_f(t tau)).

        Root-finds the analytic phi' (which has no floating-point
        cancellation, unlike energy differences) by bracketed bisection
        with secant acceleration; the bracket grows by doubling from
        1/beta or a warm start.  A final value comparison guarantees the
        result is never worse than the 1/beta step.
        """
        evals = [0]

        def dphi(t):
            evals[0] += 1
            return self._phi_prime(P, tau, t)

        t0 = 1.0 / beta
        scale = float(np.dot(self.mu, geo.minkowski(tau, tau)))  # = -phi'(0)
        start = t0 if t_init is None else max(t_init / 4.0, t0)
        lo, g_lo = 0.0, -scale
        hi = start
        g_hi = dphi(hi)
        while g_hi <= 0.0:
            if evals[0] >= max_evals - 20:
                raise LineSearchFailed("no bracket within the evaluation budget")
            lo, g_lo = hi, g_hi
            hi *= 2.0
            g_hi = dphi(hi)

        t = 0.5 * (lo + hi)
        for _ in range(60):
            if evals[0] >= max_evals:
                break
            g = dphi(t)
            if abs(g) <= 1e-10 * scale:
                break
            if g > 0.0:
                hi, g_hi = t, g
            else:
                lo, g_lo = t, g
            # secant proposal with bisection safeguard
            denom = g_hi - g_lo
            t_new = hi - g_hi * (hi - lo) / denom if denom != 0 else 0.5 * (lo + hi)
            if not (lo < t_new < hi):
                t_new = 0.5 * (lo + hi)
            if hi - lo <= 1e-14 * hi:
                t = 0.5 * (lo + hi)
                break
            t = t_new
        # optimality safeguard from the descent theorem: never worse than 1/beta
        if self.energy(self.step_from_tension(P, tau, t)) > self.energy(
            self.step_from_tension(P, tau, t0)
        ):
            t = t0
        return t

    def com_step(self, P, flavor, inner_tol=1e-10):
        """Replace every vertex by the (cosh-)barycenter of its neighbors.

        Weights are omega_xy / mu(x); the normalization does not change
        the minimizer.  All vertices update simultaneously.
        """
        q = self.neighbor_images(P)
        wsum = np.zeros(self.n)
        np.add.at(wsum, self.dir_u, self.dir_om)
        if flavor == "cosh":
            acc = np.zeros_like(P)
            np.add.at(acc, self.dir_u, self.dir_om[:, None] * q)
            return geo.normalize_point(acc)
        # karcher: vectorized fixed-point iteration over all vertices
        g = P.copy()
        for _ in range(200):
            logs = geo.log_map(g[self.dir_u], q)
            acc = np.zeros_like(P)
            np.add.at(acc, self.dir_u, self.dir_om[:, None] * logs)
            step = acc / wsum[:, None]
            res = np.sqrt(np.maximum(geo.minkowski(step, step), 0.0))
            if res.max() <= inner_tol:
                return g
            g = geo.exp_map(g, step)
        raise BarycenterDiverged(
            f"vertexwise Karcher averaging stalled above {inner_tol:g}"
        )


# ---------------------------------------------------------------------------
# numba fixed-step kernel (optional; numerically equivalent to the numpy path)

if HAVE_NUMBA:

    @numba.njit(cache=True, fastmath=False)
    def _energy_after_step(P, tau, t, eu, ev, em, om):
        """Energy of exp_P(t tau) without materializing the new map."""
        n = P.shape[0]
        Q = np.empty((n, 3))
        for i in range(n):
            v0 = t * tau[i, 0]
            v1 = t * tau[i, 1]
            v2 = t * tau[i, 2]
            nv2 = v0 * v0 + v1 * v1 - v2 * v2
            if nv2 < 0.0:
                nv2 = 0.0
            nv = np.sqrt(nv2)
            ch = np.cosh(nv)
            if nv < 1e-8:
                shc = 1.0 + nv2 / 6.0
            else:
                shc = np.sinh(nv) / nv
            p0 = ch * P[i, 0] + shc * v0
            p1 = ch * P[i, 1] + shc * v1
            p2 = ch * P[i, 2] + shc * v2
            r = 1.0 / np.sqrt(-(p0 * p0 + p1 * p1 - p2 * p2))
            Q[i, 0] = p0 * r
            Q[i, 1] = p1 * r
            Q[i, 2] = p2 * r
        en = 0.0
        for e in range(eu.shape[0]):
            u = eu[e]
            v = ev[e]
            q0 = em[e, 0, 0] * Q[v, 0] + em[e, 0, 1] * Q[v, 1] + em[e, 0, 2] * Q[v, 2]
            q1 = em[e, 1, 0] * Q[v, 0] + em[e, 1, 1] * Q[v, 1] + em[e, 1, 2] * Q[v, 2]
            q2 = em[e, 2, 0] * Q[v, 0] + em[e, 2, 1] * Q[v, 1] + em[e, 2, 2] * Q[v, 2]
            w0 = q0 - Q[u, 0]
            w1 = q1 - Q[u, 1]
            w2 = q2 - Q[u, 2]
            s2 = w0 * w0 + w1 * w1 - w2 * w2
            if s2 < 0.0:
                s2 = 0.0
            d = 2.0 * np.arcsinh(0.5 * np.sqrt(s2))
            en += 0.5 * om[e] * d * d
        return en

    @numba.njit(cache=True, fastmath=False)
    def _tension_kernel(P, du, dv, dm, dom, mu, tau):
        n = P.shape[0]
        for i in range(n):
            tau[i, 0] = 0.0
            tau[i, 1] = 0.0
            tau[i, 2] = 0.0
        for e in range(du.shape[0]):
            u = du[e]
            v = dv[e]
            q0 = dm[e, 0, 0] * P[v, 0] + dm[e, 0, 1] * P[v, 1] + dm[e, 0, 2] * P[v, 2]
            q1 = dm[e, 1, 0] * P[v, 0] + dm[e, 1, 1] * P[v, 1] + dm[e, 1, 2] * P[v, 2]
            q2 = dm[e, 2, 0] * P[v, 0] + dm[e, 2, 1] * P[v, 1] + dm[e, 2, 2] * P[v, 2]
            w0 = q0 - P[u, 0]
            w1 = q1 - P[u, 1]
            w2 = q2 - P[u, 2]
            s2 = w0 * w0 + w1 * w1 - w2 * w2
            if s2 < 0.0:
                s2 = 0.0
            sh = np.sqrt(s2)
            d = 2.0 * np.arcsinh(0.5 * sh)
            c = 1.0 + 0.5 * s2
            sinhd = sh * np.sqrt(1.0 + 0.25 * s2)
            if d < 1e-8:
                shc = 1.0 + d * d / 6.0
            else:
                shc = sinhd / d
            f = dom[e] / shc
            tau[u, 0] += f * (q0 - c * P[u, 0])
            tau[u, 1] += f * (q1 - c * P[u, 1])
            tau[u, 2] += f * (q2 - c * P[u, 2])
        tn2 = 0.0
        for i in range(n):
            tau[i, 0] /= mu[i]
            tau[i, 1] /= mu[i]
            tau[i, 2] /= mu[i]
            tn2 += mu[i] * (tau[i, 0] ** 2 + tau[i, 1] ** 2 - tau[i, 2] ** 2)
        return np.sqrt(max(tn2, 0.0))

    @numba.njit(cache=True, fastmath=False)
    def _fixed_chunk(
        P, du, dv, dm, dom, eu, ev, em, om, mu, t, nsteps, tol,
        want_energy, energies, tnorms, want_dist, target, dists,
    ):
        n = P.shape[0]
        m = du.shape[0]
        k = eu.shape[0]
        done = nsteps
        for s in range(nsteps):
            tau = np.zeros((n, 3))
            for e in range(m):
                u = du[e]
                v = dv[e]
                q0 = dm[e, 0, 0] * P[v, 0] + dm[e, 0, 1] * P[v, 1] + dm[e, 0, 2] * P[v, 2]
                q1 = dm[e, 1, 0] * P[v, 0] + dm[e, 1, 1] * P[v, 1] + dm[e, 1, 2] * P[v, 2]
                q2 = dm[e, 2, 0] * P[v, 0] + dm[e, 2, 1] * P[v, 1] + dm[e, 2, 2] * P[v, 2]
                w0 = q0 - P[u, 0]
                w1 = q1 - P[u, 1]
                w2 = q2 - P[u, 2]
                s2 = w0 * w0 + w1 * w1 - w2 * w2
                if s2 < 0.0:
                    s2 = 0.0
                sh = np.sqrt(s2)  # 2 sinh(d/2)
                d = 2.0 * np.arcsinh(0.5 * sh)
                c = 1.0 + 0.5 * s2  # cosh d
                sinhd = sh * np.sqrt(1.0 + 0.25 * s2)
                if d < 1e-8:
                    shc = 1.0 + d * d / 6.0
                else:
                    shc = sinhd / d
                f = dom[e] / shc
                tau[u, 0] += f * (q0 - c * P[u, 0])
                tau[u, 1] += f * (q1 - c * P[u, 1])
                tau[u, 2] += f * (q2 - c * P[u, 2])
            tn2 = 0.0
            for i in range(n):
                tau[i, 0] /= mu[i]
                tau[i, 1] /= mu[i]
                tau[i, 2] /= mu[i]
                tn2 += mu[i] * (tau[i, 0] ** 2 + tau[i, 1] ** 2 - tau[i, 2] ** 2)
            tnorm = np.sqrt(max(tn2, 0.0))
            tnorms[s] = tnorm
            if want_energy:
                en = 0.0
                for e in range(k):
                    u = eu[e]
                    v = ev[e]
                    q0 = em[e, 0, 0] * P[v, 0] + em[e, 0, 1] * P[v, 1] + em[e, 0, 2] * P[v, 2]
                    q1 = em[e, 1, 0] * P[v, 0] + em[e, 1, 1] * P[v, 1] + em[e, 1, 2] * P[v, 2]
                    q2 = em[e, 2, 0] * P[v, 0] + em[e, 2, 1] * P[v, 1] + em[e, 2, 2] * P[v, 2]
                    w0 = q0 - P[u, 0]
                    w1 = q1 - P[u, 1]
                    w2 = q2 - P[u, 2]
                    s2 = w0 * w0 + w1 * w1 - w2 * w2
                    if s2 < 0.0:
                        s2 = 0.0
                    d = 2.0 * np.arcsinh(0.5 * np.sqrt(s2))
                    en += 0.5 * om[e] * d * d
                energies[s] = en
            if want_dist:
                acc = 0.0
                for i in range(n):
                    w0 = P[i, 0] - target[i, 0]
                    w1 = P[i, 1] - target[i, 1]
                    w2 = P[i, 2] - target[i, 2]
                    s2 = w0 * w0 + w1 * w1 - w2 * w2
                    if s2 < 0.0:
                        s2 = 0.0
                    d = 2.0 * np.arcsinh(0.5 * np.sqrt(s2))
                    acc += mu[i] * d * d
                dists[s] = np.sqrt(acc)
            if tnorm <= tol:
                done = s
                return done
            # simultaneous update
            for i in range(n):
                v0 = t * tau[i, 0]
                v1 = t * tau[i, 1]
                v2 = t * tau[i, 2]
                nv2 = v0 * v0 + v1 * v1 - v2 * v2
                if nv2 < 0.0:
                    nv2 = 0.0
                nv = np.sqrt(nv2)
                ch = np.cosh(nv)
                if nv < 1e-8:
                    shc = 1.0 + nv2 / 6.0
                else:
                    shc = np.sinh(nv) / nv
                p0 = ch * P[i, 0] + shc * v0
                p1 = ch * P[i, 1] + shc * v1
                p2 = ch * P[i, 2] + shc * v2
                q = -(p0 * p0 + p1 * p1 - p2 * p2)
                r = 1.0 / np.sqrt(q)
                P[i, 0] = p0 * r
                P[i, 1] = p1 * r
                P[i, 2] = p2 * r
        return done


def run_flow(engine, config, initial_local, record_energy=False, distance_target=None):
    """Drive the configured iteration until the tension norm reaches the
    tolerance or the iteration cap.

    Returns (snapshots, info) where snapshots is a list of `FlowState`
    (one per stride plus the final state, local coordinates left to the
    caller to globalize) and info carries per-iteration energy/tension
    histories when requested.  Raises `FlowNotConverged` with the partial
    trajectory attached when the cap is hit.
    """
    P = np.array(initial_local, dtype=float)
    method = config.method
    tol = config.tolerance
    snapshots = []
    energies = [] if record_energy else None
    tnorms = [] if record_energy else None
    dists = [] if distance_target is not None else None

    beta = getattr(config, "_beta", None)
    t_fixed = config.stepsize
    last_opt = [None]
    if method == "fixed" and t_fixed is None:
        raise ValueError("fixed method needs a stepsize (or pass beta via constants)")

    def snap(it, en, tn, step):
        snapshots.append(FlowState(P.copy(), it, en, tn, step, method))

    it = 0
    tau = engine.tension(P)
    tn = engine.tension_norm(tau)
    en = engine.energy(P)
    snap(0, en, tn, 0.0)
    if record_energy:
        energies.append(en)
        tnorms.append(tn)
    if dists is not None:
        dists.append(engine.map_distance(P, distance_target))

    use_numba = HAVE_NUMBA and method == "fixed"
    target_local = (
        np.asarray(distance_target, dtype=float)
        if distance_target is not None
        else np.zeros((1, 3))
    )

    while tn > tol and it < config.max_iterations:
        if use_numba:
            chunk = min(config.snapshot_stride, config.max_iterations - it)
            ebuf = np.zeros(chunk)
            tbuf = np.zeros(chunk)
            dbuf = np.zeros(chunk if dists is not None else 1)
            done = _fixed_chunk(
                P,
                engine.dir_u,
                engine.dir_v,
                engine.dir_m,
                engine.dir_om,
                engine.edge_u,
                engine.edge_v,
                engine.edge_m,
                engine.omega,
                engine.mu,
                t_fixed,
                chunk,
                tol,
                record_energy,
                ebuf,
                tbuf,
                dists is not None,
                target_local,
                dbuf,
            )
            stepped = done if done < chunk else chunk
            # kernel entry s describes the state at iteration it + s; the
            # state at `it` is already recorded, so append s = 1..stepped
            if record_energy:
                energies.extend(ebuf[1 : stepped + 1 if stepped < chunk else chunk].tolist())
                tnorms.extend(tbuf[1 : stepped + 1 if stepped < chunk else chunk].tolist())
            if dists is not None:
                dists.extend(dbuf[1 : stepped + 1 if stepped < chunk else chunk].tolist())
            it += stepped
            tau = engine.tension(P)
            tn = engine.tension_norm(tau)
            en = engine.energy(P)
            if stepped == chunk:
                if record_energy:
                    energies.append(en)
                    tnorms.append(tn)
                if dists is not None:
                    dists.append(engine.map_distance(P, target_local))
            snap(it, en, tn, t_fixed)
            continue
        # single iteration (numpy path)
        if method == "fixed":
            step = t_fixed
            P = engine.step_from_tension(P, tau, step)
        elif method == "optimal":
            if beta is None:
                raise ValueError("optimal method needs beta (set config._beta)")
            step = engine.optimal_stepsize(P, tau, beta, t_init=last_opt[0])
            last_opt[0] = step
            P = engine.step_from_tension(P, tau, step)
        elif method == "karcher-com":
            step = 0.0
            P = engine.com_step(P, "karcher", inner_tol=tol / 1000.0)
        else:  # cosh-com
            step = 0.0
            P = engine.com_step(P, "cosh")
        it += 1
        tau = engine.tension(P)
        tn = engine.tension_norm(tau)
        en = engine.energy(P)
        if record_energy:
            energies.append(en)
            tnorms.append(tn)
        if dists is not None:
            dists.append(engine.map_distance(P, distance_target))
        if it % config.snapshot_stride == 0:
            snap(it, en, tn, step)

    if not snapshots or snapshots[-1].iteration != it:
        snap(it, en, tn, snapshots[-1].last_stepsize if snapshots else 0.0)
    info = {"energies": energies, "tension_norms": tnorms, "distances": dists}
    if tn > tol:
        raise FlowNotConverged(
            f"tension norm {tn:.3e} > {tol:g} after {it} iterations",
            trajectory=(snapshots, info),
        )
    return snapshots, info
