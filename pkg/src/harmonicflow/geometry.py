"""Hyperbolic plane in the hyperboloid model: points, tangent vectors,
isometries, exp/log, parallel transport, triangles, and barycenters.

Points live on the upper sheet of ``x1^2 + x2^2 - x3^2 = -1`` inside
Minkowski space R^{2,1} and are represented as plain float64 arrays of
shape ``(3,)``.  Every function broadcasts over leading axes, so arrays of
shape ``(n, 3)`` work everywhere; this is what the flow engine relies on.

Tangent vectors at ``p`` are Minkowski-orthogonal to ``p`` and are also
plain ``(..., 3)`` arrays.  Orientation-preserving isometries are kept as
real 2x2 matrices of determinant one (`Isometry`); their action on the
hyperboloid goes through the symmetric-matrix model, see
`Isometry.apply`.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BarycenterDiverged, CoordinateOverflow, DegenerateTriangle

# Maximum allowed x3 coordinate (distance ~19 from the origin): beyond
# this, cosh growth eats more than half of the double-precision mantissa.
OVERFLOW_LIMIT = 1e8

# |<p,p> + 1| tolerated after construction / renormalization.
SHEET_TOL = 1e-12

_MINK_DIAG = np.array([1.0, 1.0, -1.0])


def minkowski(u, v):
    """Indefinite inner product u1*v1 + u2*v2 - u3*v3, broadcasting."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 0] + u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def sinhc(x):
    """sinh(x)/x extended by 1 at 0, with a series branch below 1e-4."""
    x = np.asarray(x, dtype=float)
    small = np.abs(x) < 1e-4
    xs = np.where(small, 1.0, x)
    out = np.where(small, 1.0 + x * x / 6.0 + x**4 / 120.0, np.sinh(xs) / xs)
    if out.ndim == 0:
        return float(out)
    return out


def make_point(x1, x2, x3):
    """Build a point from Minkowski coordinates, projecting onto the sheet."""
    return normalize_point(np.array([x1, x2, x3], dtype=float))


def normalize_point(p):
    """Rescale p onto the unit hyperboloid (upper sheet).

    Raises `CoordinateOverflow` if the point is unusably far out.
    """
    p = np.asarray(p, dtype=float)
    x3 = p[..., 2]
    if np.any(x3 <= 0):
        raise ValueError("point not on the upper sheet (x3 <= 0)")
    if np.any(np.abs(x3) > OVERFLOW_LIMIT):
        raise CoordinateOverflow(f"x3 = {np.max(np.abs(x3)):.3e} exceeds {OVERFLOW_LIMIT:.0e}")
    q = -minkowski(p, p)
    if np.any(q <= 0):
        raise ValueError("point is not timelike")
    return p / np.sqrt(q)[..., None]


def check_point(p, tol=SHEET_TOL):
    """Assert the sheet invariants; returns p unchanged."""
    p = np.asarray(p, dtype=float)
    err = np.abs(minkowski(p, p) + 1.0)
    if np.any(err > tol):
        raise ValueError(f"point off the hyperboloid by {np.max(err):.3e}")
    if np.any(p[..., 2] < 1.0 - tol):
        raise ValueError("point below the upper sheet")
    return p


def origin():
    """The point (0, 0, 1)."""
    return np.array([0.0, 0.0, 1.0])


def tangent_project(p, w):
    """Minkowski-orthogonal projection of an ambient vector onto T_p."""
    return w + minkowski(p, w)[..., None] * np.asarray(p, dtype=float)


def check_tangent(p, v, tol=1e-10):
    """Assert <p, v> = 0 and <v, v> >= 0; returns v unchanged."""
    v = np.asarray(v, dtype=float)
    if np.any(np.abs(minkowski(p, v)) > tol):
        raise ValueError("vector not tangent to the hyperboloid at its base point")
    if np.any(minkowski(v, v) < -tol):
        raise ValueError("tangent vector has negative square norm")
    return v


def norm(v):
    """Minkowski norm of a tangent vector (clamped at 0)."""
    return np.sqrt(np.maximum(minkowski(v, v), 0.0))


def dist(a, b):
    """Geodesic distance between two points on the sheet.

    Mathematically arccosh(-<a, b>), but evaluated as
    2*arcsinh(||a - b||_M / 2), which is exact at coincident points and
    does not lose half the mantissa for nearby ones.
    """
    w = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    s = np.sqrt(np.maximum(minkowski(w, w), 0.0))
    d = 2.0 * np.arcsinh(s / 2.0)
    if d.ndim == 0:
        return float(d)
    return d


def exp_map(x, v):
    """Follow the geodesic from x with initial velocity v for unit time."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = norm(v)
    p = np.cosh(t)[..., None] * x + np.asarray(sinhc(t))[..., None] * v
    return normalize_point(p)


def log_map(x, y):
    """Inverse of `exp_map`: tangent vector at x pointing to y.

    Satisfies ||log_map(x, y)|| = dist(x, y).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = np.asarray(dist(x, y))
    c = np.cosh(d)
    return (y - c[..., None] * x) / np.asarray(sinhc(d))[..., None]


def midpoint(a, b):
    """Geodesic midpoint (normalized Minkowski average)."""
    return normalize_point(np.asarray(a, dtype=float) + np.asarray(b, dtype=float))


def parallel_transport(v, a, b):
    """Parallel transport of v in T_a along the geodesic [a, b] to T_b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    v = np.asarray(v, dtype=float)
    denom = 1.0 - minkowski(a, b)  # = 1 + cosh d >= 2
    return v + (minkowski(b, v) / denom)[..., None] * (a + b)


def rotate90(p, u):
    """Rotation of u in T_p by +pi/2 (Minkowski cross product with p)."""
    p = np.asarray(p, dtype=float)
    u = np.asarray(u, dtype=float)
    return np.cross(p, u) * _MINK_DIAG


def tangent_basis(p):
    """A Minkowski-orthonormal, positively oriented basis (e1, e2) of T_p."""
    p = np.asarray(p, dtype=float)
    e1 = tangent_project(p, np.array([1.0, 0.0, 0.0]))
    e1 = e1 / norm(e1)
    return e1, rotate90(p, e1)


def oriented_angle(p, ref, w):
    """Signed angle at p from direction ref to direction w, in (-pi, pi]."""
    x = minkowski(ref, w)
    y = minkowski(rotate90(p, ref), w)
    a = np.arctan2(y, x)
    if np.ndim(a) == 0:
        return float(a)
    return a


def angle_between(p, u, v):
    """Unsigned angle between tangent vectors u, v at p."""
    nu, nv = norm(u), norm(v)
    if np.any(nu == 0.0) or np.any(nv == 0.0):
        raise ValueError("angle undefined for a zero tangent vector")
    c = np.clip(minkowski(u, v) / (nu * nv), -1.0, 1.0)
    a = np.arccos(c)
    if np.ndim(a) == 0:
        return float(a)
    return a


def triangle_angles_area(a, b, c, degenerate_tol=1e-12):
    """Interior angles (at a, b, c) and area of a geodesic triangle.

    Area is the angle defect pi - (alpha + beta + gamma).  Raises
    `DegenerateTriangle` when the vertices are numerically collinear.
    """
    sides = (dist(b, c), dist(c, a), dist(a, b))
    if min(sides) <= degenerate_tol:
        raise DegenerateTriangle("triangle has a collapsed side")
    alpha = angle_between(a, log_map(a, b), log_map(a, c))
    beta = angle_between(b, log_map(b, c), log_map(b, a))
    gamma = angle_between(c, log_map(c, a), log_map(c, b))
    area = np.pi - (alpha + beta + gamma)
    if area <= degenerate_tol or min(alpha, beta, gamma) <= degenerate_tol:
        raise DegenerateTriangle("triangle is numerically collinear")
    return (alpha, beta, gamma), area


def triangle_angles_from_sides(la, lb, lc):
    """Interior angles opposite the sides (la, lb, lc) via half-angle
    tangent formulas.

    Stable for small triangles regardless of where their vertices sit:
    only side lengths enter, no direction vectors.
    """
    s = (la + lb + lc) / 2.0
    parts = [np.sinh(s)] + [np.sinh(s - l) for l in (la, lb, lc)]
    if min(parts) <= 0.0:
        raise DegenerateTriangle("side lengths violate the triangle inequality")
    out = []
    for k in range(3):
        opp = parts[1 + k]
        others = [parts[1 + j] for j in range(3) if j != k]
        out.append(2.0 * np.arctan(np.sqrt(others[0] * others[1] / (parts[0] * opp))))
    return tuple(out)


def triangle_area(a, b, c):
    """Triangle area (angle defect) via the side-length excess formula.

    tan(area/4) = sqrt(prod tanh(...)) is far better conditioned than
    pi - (angle sum) for small triangles with far-out coordinates, where
    the defect cancels catastrophically.
    """
    la, lb, lc = dist(b, c), dist(c, a), dist(a, b)
    s = (la + lb + lc) / 2.0
    t = (
        np.tanh(s / 2.0)
        * np.tanh((s - la) / 2.0)
        * np.tanh((s - lb) / 2.0)
        * np.tanh((s - lc) / 2.0)
    )
    return float(4.0 * np.arctan(np.sqrt(max(t, 0.0))))


def disk_coords(p):
    """Poincare disk coordinates (u, v) of a hyperboloid point."""
    p = np.asarray(p, dtype=float)
    w = 1.0 + p[..., 2]
    return np.stack([p[..., 0] / w, p[..., 1] / w], axis=-1)


def disk_point(uv):
    """Inverse of `disk_coords`."""
    uv = np.asarray(uv, dtype=float)
    s = uv[..., 0] ** 2 + uv[..., 1] ** 2
    if np.any(s >= 1.0):
        raise ValueError("disk coordinates must satisfy u^2 + v^2 < 1")
    denom = 1.0 - s
    return np.stack(
        [2.0 * uv[..., 0] / denom, 2.0 * uv[..., 1] / denom, (1.0 + s) / denom], axis=-1
    )


def halfplane_coords(p):
    """Upper half-plane coordinates (x, y) of a hyperboloid point."""
    p = np.asarray(p, dtype=float)
    denom = p[..., 2] - p[..., 1]
    return np.stack([p[..., 0] / denom, 1.0 / denom], axis=-1)


def halfplane_point(xy):
    """Inverse of `halfplane_coords` (y > 0 required)."""
    xy = np.asarray(xy, dtype=float)
    x, y = xy[..., 0], xy[..., 1]
    if np.any(y <= 0):
        raise ValueError("upper half-plane requires y > 0")
    s = x * x + y * y
    return np.stack([x / y, (s - 1.0) / (2.0 * y), (s + 1.0) / (2.0 * y)], axis=-1)


class Isometry:
    """Orientation-preserving isometry of H^2 as a unit-determinant 2x2 matrix.

    The matrix acts on the upper half-plane by Mobius transformations; the
    induced hyperboloid action is computed through the symmetric-matrix
    model: a point p corresponds to S = [[x3+x2, x1], [x1, x3-x2]] with
    det S = 1, and g sends S to g S g^T.
    """

    __slots__ = ("m",)

    def __init__(self, m, *, tol=1e-12):
        m = np.asarray(m, dtype=float)
        if m.shape != (2, 2):
            raise ValueError("isometry needs a 2x2 matrix")
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        if abs(det - 1.0) > 1e-6:
            raise ValueError(f"matrix determinant {det} too far from 1")
        if abs(det - 1.0) > tol:
            m = m / np.sqrt(det)
        self.m = m

    @classmethod
    def identity(cls):
        return cls(np.eye(2))

    def __matmul__(self, other):
        return Isometry(self.m @ other.m)

    def inverse(self):
        a, b, c, d = self.m.ravel()
        return Isometry(np.array([[d, -b], [-c, a]]))

    def trace(self):
        return float(self.m[0, 0] + self.m[1, 1])

    def apply(self, p):
        """Apply to hyperboloid points of shape (..., 3)."""
        p = np.asarray(p, dtype=float)
        x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
        a, b, c, d = self.m.ravel()
        # S = [[s11, s12], [s12, s22]] with s11 = x3+x2, s22 = x3-x2.
        s11 = x3 + x2
        s22 = x3 - x2
        t11 = a * a * s11 + 2.0 * a * b * x1 + b * b * s22
        t12 = a * c * s11 + (a * d + b * c) * x1 + b * d * s22
        t22 = c * c * s11 + 2.0 * c * d * x1 + d * d * s22
        out = np.stack([t12, (t11 - t22) / 2.0, (t11 + t22) / 2.0], axis=-1)
        return normalize_point(out)

    def minkowski_matrix(self):
        """The induced linear action on R^{2,1} as a 3x3 matrix."""
        cols = []
        a, b, c, d = self.m.ravel()
        # Images of the basis symmetric matrices for x1, x2, x3.
        for s11, s12, s22 in ((0.0, 1.0, 0.0), (1.0, 0.0, -1.0), (1.0, 0.0, 1.0)):
            t11 = a * a * s11 + 2.0 * a * b * s12 + b * b * s22
            t12 = a * c * s11 + (a * d + b * c) * s12 + b * d * s22
            t22 = c * c * s11 + 2.0 * c * d * s12 + d * d * s22
            cols.append([t12, (t11 - t22) / 2.0, (t11 + t22) / 2.0])
        return np.array(cols).T

    def apply_tangent(self, v):
        """Apply to tangent vectors of shape (..., 3) (same linear action)."""
        M = self.minkowski_matrix()
        return np.asarray(v, dtype=float) @ M.T

    def __repr__(self):
        return f"Isometry({self.m.tolist()})"


@dataclass
class WeightedPointSet:
    """Finitely many hyperboloid points with positive weights summing to 1."""

    points: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.weights is None:
            self.weights = np.full(len(self.points), 1.0 / len(self.points))
        self.weights = np.asarray(self.weights, dtype=float)
        if len(self.weights) != len(self.points):
            raise ValueError("weights and points must have matching lengths")
        if np.any(self.weights <= 0):
            raise ValueError("weights must be strictly positive")
        self.weights = self.weights / self.weights.sum()
        check_point(self.points, tol=1e-9)


def karcher_barycenter(pset, tol=1e-10, max_iter=200, step=1.0):
    """Karcher (Riemannian) barycenter of a weighted point set.

    Fixed-stepsize gradient descent on the weighted half-squared-distance
    objective; on the hyperbolic plane the objective is 1-strongly convex,
    so a unit step converges for point sets of moderate diameter.  Stops
    when the log-map average has norm <= tol.
    """
    pts, w = pset.points, pset.weights
    if len(pts) == 1:
        return pts[0].copy()
    g = cosh_barycenter(pset)  # cheap warm start, already O(r^3) accurate
    for _ in range(max_iter):
        v = (w[:, None] * log_map(g, pts)).sum(axis=0)
        if norm(v) <= tol:
            return g
        g = exp_map(g, step * v)
    raise BarycenterDiverged(f"no convergence to {tol:g} after {max_iter} iterations")


def karcher_residual(g, pset):
    """Norm of the weighted log-map average at g (zero at the barycenter)."""
    return float(norm((pset.weights[:, None] * log_map(g, pset.points)).sum(axis=0)))


def cosh_barycenter(pset):
    """cosh-center of mass: normalized Minkowski average of the points."""
    p = (pset.weights[:, None] * pset.points).sum(axis=0)
    return normalize_point(p)


def cosh_residual(g, pset):
    """Norm of the sinhc-weighted log-map average at g.

    This is the defining first-order condition of the cosh-center of
    mass; it vanishes at `cosh_barycenter`.
    """
    d = dist(g, pset.points)
    v = (pset.weights * np.asarray(sinhc(d)))[:, None] * log_map(g, pset.points)
    return float(norm(v.sum(axis=0)))
