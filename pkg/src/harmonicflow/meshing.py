"""Fundamental polygons, invariant triangulated meshes, and their
biweighted quotient graphs.

The fundamental polygon of a Fuchsian representation is the orbit of a
single base point under the prefixes of the relator; all 4g corners lie
in one vertex orbit and sides are paired by explicit group elements.
The base point is chosen by Newton minimization of the total side-length
cost sum(cosh(side) - 1), which is a Minkowski-quadratic form in the
base point.

Meshes are stored as a *fundamental domain of triangle instances*: each
triangle corner is an (orbit, word) pair, meaning the corner sits at
rho(word) applied to the orbit representative's position.  Because every
instance word is built by concatenation from the construction, two
instances of the same edge pull back to the *same reduced word*, so the
quotient graph (edge orbits, valences, Euler characteristic) is computed
by exact word bookkeeping, with floating point entering only through the
representative positions.  Midpoint refinement is likewise purely
combinatorial plus one geodesic midpoint per edge orbit.
"""

from dataclasses import dataclass, field

import numpy as np

from . import geometry as geo
from .errors import (
    GraphDisconnected,
    NonAcuteTriangulation,
    PolygonOptimizationFailed,
    PolygonSelfIntersecting,
    TriangulationDegenerate,
)
from .surface import concat, reduce_word, word_inverse, word_str, parse_word

_ETA = np.diag([1.0, 1.0, -1.0])


class _RhoCache:
    """Memoized evaluation word -> Isometry for a fixed representation.

    Point evaluation runs in extended precision: fundamental polygons of
    eccentric markings reach Minkowski coordinates e^{O(diameter)}, where
    float64 word products and conjugations would lose 1e-5-level absolute
    accuracy; 80-bit intermediates keep instance coordinates at the
    float64 representation floor.
    """

    def __init__(self, rep, labels):
        self.rep = rep
        self.labels = labels
        self._iso = {(): geo.Isometry.identity()}
        self._ld = {(): np.eye(2, dtype=np.longdouble)}
        self._pts = {}

    def _letter_ld(self, x):
        out = self._ld.get((x,))
        if out is None:
            m = self.rep[self.labels[abs(x) - 1]].m.astype(np.longdouble)
            self._ld[(abs(x),)] = m
            if x < 0:
                m = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])
                self._ld[(x,)] = m
            out = m
        return out

    def matrix_ld(self, word):
        out = self._ld.get(word)
        if out is None:
            out = np.eye(2, dtype=np.longdouble)
            for x in word:
                out = out @ self._letter_ld(x)
            self._ld[word] = out
        return out

    def iso(self, word):
        out = self._iso.get(word)
        if out is None:
            out = geo.Isometry(np.asarray(self.matrix_ld(word), dtype=float))
            self._iso[word] = out
        return out

    def mink(self, word):
        return self.iso(word).minkowski_matrix()

    def point(self, word, p):
        """rho(word) applied to a point (extended-precision conjugation)."""
        if not word:
            return p
        key = (word, p.tobytes())
        out = self._pts.get(key)
        if out is None:
            m = self.matrix_ld(word)
            q = np.asarray(p, dtype=np.longdouble)
            s11 = q[2] + q[1]
            s22 = q[2] - q[1]
            a, b, c, d = m.ravel()
            t11 = a * a * s11 + 2.0 * a * b * q[0] + b * b * s22
            t12 = a * c * s11 + (a * d + b * c) * q[0] + b * d * s22
            t22 = c * c * s11 + 2.0 * c * d * q[0] + d * d * s22
            out = np.array([t12, (t11 - t22) / 2.0, (t11 + t22) / 2.0], dtype=np.longdouble)
            norm = np.sqrt(-(out[0] ** 2 + out[1] ** 2 - out[2] ** 2))
            out = np.asarray(out / norm, dtype=float)
            self._pts[key] = out
        return out

    def psl_matrix(self, word):
        """Sign-normalized 2x2 matrix of the word (canonical in PSL)."""
        m = self.iso(word).m
        for v in m.ravel():
            if abs(v) > 1e-8:
                return m if v > 0 else -m
        return m


# ---------------------------------------------------------------------------
# fundamental polygon


@dataclass
class FundamentalPolygon:
    """Polygonal fundamental domain determined by one base point.

    vertices[k] = rho(vertex_words[k]) base; side k runs from vertex k to
    vertex k+1 and is glued to side partner[k] by rho(pairings[k]).
    """

    base: np.ndarray
    vertex_words: list
    vertices: np.ndarray
    partner: list
    pairings: list  # pairings[k]: word mapping side k onto side partner[k]
    group: object
    rep: dict

    @property
    def num_sides(self):
        return len(self.vertex_words)

    def side_length(self, k):
        return geo.dist(self.vertices[k], self.vertices[(k + 1) % self.num_sides])


def _polygon_combinatorics(group):
    """Vertex words (relator prefixes) and side pairing words."""
    relator = group.relator
    n = len(relator)
    vertex_words = [reduce_word(relator[:k]) for k in range(n)]
    pos = {}
    partner = [None] * n
    for k, x in enumerate(relator):
        if -x in pos:
            j = pos.pop(-x)
            partner[k], partner[j] = j, k
        else:
            pos[x] = k
    pairings = []
    for k in range(n):
        j = partner[k]
        w_next = reduce_word(relator[: k + 1])
        pairings.append(concat(vertex_words[j], word_inverse(w_next)))
    return vertex_words, partner, pairings


def _side_cost_matrix(rho, vertex_words):
    """Q with cost(z) = z^T Q z - n; cosh side_k = -<M_k z, M_{k+1} z>."""
    n = len(vertex_words)
    q = np.zeros((3, 3))
    for k in range(n):
        a = rho.mink(vertex_words[k])
        b = rho.mink(vertex_words[(k + 1) % n])
        m = a.T @ _ETA @ b
        q -= (m + m.T) / 2.0
    return q


def _cost_gradient(q, z):
    return 2.0 * (_ETA @ q @ z + float(z @ q @ z) * z)


def _axis_anchor_point(iso):
    """Point on the axis of a hyperbolic isometry closest to the origin."""
    m = iso.minkowski_matrix()
    vals, vecs = np.linalg.eig(m)
    null = []
    for i in range(3):
        if abs(vals[i].imag) < 1e-9 and vals[i].real > 0 and abs(vals[i].real - 1.0) > 1e-9:
            v = np.real(vecs[:, i])
            if abs(geo.minkowski(v, v)) < 1e-6 * float(v @ v):
                null.append(v if v[2] > 0 else -v)
    if len(null) != 2:
        return geo.origin()
    n1, n2 = null
    ip = geo.minkowski(n1, n2)
    c = -1.0 / (2.0 * ip)
    s = np.sqrt(c * n2[2] / n1[2])
    t = np.sqrt(c * n1[2] / n2[2])
    return geo.normalize_point(s * n1 + t * n2)


def optimize_fundamental_polygon(rep, group, grad_tol=1e-8, max_iter=100):
    """Choose the polygon base point by Newton descent on the side cost.

    The cost is sum over sides of (cosh(length) - 1); its gradient has a
    closed form, the 2x2 tangent Hessian is taken by central differences.
    Raises `PolygonOptimizationFailed` on non-convergence and
    `PolygonSelfIntersecting` if the optimal polygon is not simple.
    """
    rho = _RhoCache(rep, group.labels)
    vertex_words, partner, pairings = _polygon_combinatorics(group)
    q = _side_cost_matrix(rho, vertex_words)

    pts = [_axis_anchor_point(rep[lab]) for lab in group.labels]
    z = geo.cosh_barycenter(geo.WeightedPointSet(np.stack(pts)))

    converged = False
    for _ in range(max_iter):
        grad = _cost_gradient(q, z)
        gnorm = geo.norm(grad)
        if gnorm <= grad_tol:
            converged = True
            break
        e1, e2 = geo.tangent_basis(z)
        h = 1e-6
        hess = np.zeros((2, 2))
        for col, e in enumerate((e1, e2)):
            gp = _cost_gradient(q, geo.exp_map(z, h * e))
            gm = _cost_gradient(q, geo.exp_map(z, -h * e))
            # transport both gradients back to z before differencing
            gp = geo.parallel_transport(gp, geo.exp_map(z, h * e), z)
            gm = geo.parallel_transport(gm, geo.exp_map(z, -h * e), z)
            d = (gp - gm) / (2.0 * h)
            hess[0, col] = geo.minkowski(e1, d)
            hess[1, col] = geo.minkowski(e2, d)
        rhs = -np.array([geo.minkowski(e1, grad), geo.minkowski(e2, grad)])
        try:
            step = np.linalg.solve((hess + hess.T) / 2.0, rhs)
        except np.linalg.LinAlgError:
            step = rhs
        if not np.all(np.isfinite(step)):
            step = rhs
        v = step[0] * e1 + step[1] * e2
        # Newton with a safeguard: fall back to a plain gradient step when
        # the Newton step fails to decrease the cost.
        z_new = geo.exp_map(z, v)
        if float(z_new @ q @ z_new) >= float(z @ q @ z) and gnorm > 1e-12:
            z_new = geo.exp_map(z, -grad / max(1.0, gnorm))
        z = z_new
    if not converged:
        raise PolygonOptimizationFailed(
            f"gradient norm {geo.norm(_cost_gradient(q, z)):.3e} > {grad_tol:g} "
            f"after {max_iter} iterations"
        )

    vertices = np.stack([rho.point(w, z) for w in vertex_words])
    poly = FundamentalPolygon(z, vertex_words, vertices, partner, pairings, group, rep)
    if not _polygon_is_simple(vertices):
        raise PolygonSelfIntersecting("optimal polygon boundary crosses itself")
    return poly


def _polygon_is_simple(vertices):
    """Boundary simplicity test on Klein-model straight segments."""
    pts = vertices[:, :2] / vertices[:, 2:3]
    n = len(pts)
    for i in range(n):
        a1, a2 = pts[i], pts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or (i + 1) % n == j:
                continue
            b1, b2 = pts[j], pts[(j + 1) % n]
            if _segments_cross(a1, a2, b1, b2):
                return False
    return True


def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(a1, a2, b1, b2, eps=1e-14):
    d1 = _orient(b1, b2, a1)
    d2 = _orient(b1, b2, a2)
    d3 = _orient(a1, a2, b1)
    d4 = _orient(a1, a2, b2)
    return (d1 * d2 < -eps) and (d3 * d4 < -eps)


# ---------------------------------------------------------------------------
# triangulated meshes


@dataclass
class MeshVertex:
    tag: str  # "corner" | "side" | "midpoint"
    point: np.ndarray
    side_info: tuple = None  # (side index, fraction along side) for "side"
    parents: tuple = None  # (orbit_u, orbit_v, word) for "midpoint"


@dataclass
class TriangulatedMesh:
    """Fundamental domain of triangle instances over vertex orbits."""

    group: object
    rep: dict
    polygon: FundamentalPolygon
    vertices: list  # MeshVertex per orbit
    triangles: list  # ((orbit, word) x 3) per triangle instance
    depth: int
    steiner_per_side: int

    def rho(self):
        return _RhoCache(self.rep, self.group.labels)

    def corner_coords(self, rho=None):
        """Instance corner positions, shape (F, 3, 3)."""
        rho = rho or self.rho()
        out = np.empty((len(self.triangles), 3, 3))
        for t, tri in enumerate(self.triangles):
            for c in range(3):
                orbit, word = tri[c]
                out[t, c] = rho.point(word, self.vertices[orbit].point)
        return out


class EdgeIndex:
    """Edge orbits of the quotient graph.

    Instance edges pull back to (source orbit, target orbit, gluing word)
    triples.  Words equal in the free group reduce to identical tuples,
    but boundary identifications that wrap past the base corner differ by
    the full relator, so variants are clustered by the sign-normalized
    2x2 matrix of the word: deck transformations of a Fuchsian group are
    separated by systole-scale gaps, which makes tolerance matching
    exact in practice.

    ``edges[i] = (u, v, word)`` with a deterministic canonical direction
    and the shortest seen word; ``resolve`` maps an instance edge to
    ``(edge index, is_forward)``.
    """

    def __init__(self, mesh, rho=None):
        self.rho = rho or mesh.rho()
        self._clusters = {}  # (u, v) -> list[[matrix, variants set]]
        self._lookup = {}  # (u, v, word) -> (cluster key, position)
        for tri in mesh.triangles:
            for c in range(3):
                (u, wu), (v, wv) = tri[c], tri[(c + 1) % 3]
                self._insert(u, wu, v, wv)
        self.edges = []
        self._ids = {}
        for (u, v), lst in sorted(self._clusters.items()):
            for pos, (_, variants) in enumerate(lst):
                word = min(variants, key=lambda w: (len(w), w))
                self._ids[(u, v, pos)] = len(self.edges)
                self.edges.append((u, v, word))

    def _direction(self, u, v, w):
        """Deterministic canonical direction of an edge element."""
        if u != v:
            return (u, v, w, True) if u < v else (v, u, word_inverse(w), False)
        mf = self.rho.psl_matrix(w)
        mr = self.rho.psl_matrix(word_inverse(w))
        diff = (mf - mr).ravel()
        for d in diff:
            if abs(d) > 1e-6:
                return (u, v, w, True) if d > 0 else (v, u, word_inverse(w), False)
        raise TriangulationDegenerate("edge glued by an involution-like element")

    def _insert(self, u, wu, v, wv):
        w = reduce_word(tuple(word_inverse(wu)) + tuple(wv))
        cu, cv, cw, _ = self._direction(u, v, w)
        if (cu, cv, cw) in self._lookup:
            return
        m = self.rho.psl_matrix(cw)
        lst = self._clusters.setdefault((cu, cv), [])
        scale = max(1.0, float(np.abs(m).max()))
        for pos, entry in enumerate(lst):
            if np.abs(entry[0] - m).max() <= 1e-8 * scale:
                entry[1].add(cw)
                self._lookup[(cu, cv, cw)] = ((cu, cv), pos)
                return
        lst.append([m, {cw}])
        self._lookup[(cu, cv, cw)] = ((cu, cv), len(lst) - 1)

    def resolve(self, u, wu, v, wv):
        """(edge index, is_forward) of an instance edge."""
        w = reduce_word(tuple(word_inverse(wu)) + tuple(wv))
        cu, cv, cw, forward = self._direction(u, v, w)
        key, pos = self._lookup[(cu, cv, cw)]
        return self._ids[(key[0], key[1], pos)], forward

    def __len__(self):
        return len(self.edges)


def quotient_edges(mesh, rho=None):
    """Canonical edge-orbit list and the index structure."""
    index = EdgeIndex(mesh, rho)
    return index.edges, index


def euler_characteristic(mesh):
    edges, _ = quotient_edges(mesh)
    return len(mesh.vertices) - len(edges) + len(mesh.triangles)


def geodesic_interpolate(a, b, t):
    """Point at parameter t along the geodesic [a, b], in extended
    precision: p = (sinh((1-t)d) a + sinh(td) b) / sinh(d), renormalized.
    """
    a = np.asarray(a, dtype=np.longdouble)
    b = np.asarray(b, dtype=np.longdouble)
    w = a - b
    d = 2.0 * np.arcsinh(np.sqrt(max(w[0] ** 2 + w[1] ** 2 - w[2] ** 2, 0.0)) / 2.0)
    p = np.sinh((1.0 - t) * d) * a + np.sinh(t * d) * b
    p = p / np.sqrt(-(p[0] ** 2 + p[1] ** 2 - p[2] ** 2))
    return np.asarray(p, dtype=float)


def _boundary_slots(polygon, steiner_per_side):
    """Boundary cycle of (orbit, word, point) slots; builds vertex table."""
    n = polygon.num_sides
    s = steiner_per_side
    vertices = [MeshVertex("corner", polygon.base.copy())]
    # side-point orbits: only canonical sides (k < partner) own orbits
    side_orbit = {}
    for k in range(n):
        if k < polygon.partner[k]:
            a, b = polygon.vertices[k], polygon.vertices[(k + 1) % n]
            for i in range(1, s + 1):
                pt = geodesic_interpolate(a, b, i / (s + 1.0))
                side_orbit[(k, i)] = len(vertices)
                vertices.append(MeshVertex("side", pt, side_info=(k, i / (s + 1.0))))
    slots = []
    for k in range(n):
        slots.append((0, polygon.vertex_words[k], polygon.vertices[k]))
        j = polygon.partner[k]
        for i in range(1, s + 1):
            if k < j:
                orbit = side_orbit[(k, i)]
                word = ()
                pt = vertices[orbit].point
            else:
                orbit = side_orbit[(j, s + 1 - i)]
                word = polygon.pairings[j]  # maps side j onto side k
                pt = None  # computed below from the orbit representative
            slots.append((orbit, word, pt))
    rho = _RhoCache(polygon.rep, polygon.group.labels)
    out = []
    for orbit, word, pt in slots:
        if pt is None:
            pt = rho.point(word, vertices[orbit].point)
        out.append((orbit, reduce_word(word), pt))
    return out, vertices


def _interior_angle(pts, i, j, k):
    """Angle at pts[j] between directions to pts[i] and pts[k]."""
    u = geo.log_map(pts[j], pts[i])
    v = geo.log_map(pts[j], pts[k])
    return geo.angle_between(pts[j], u, v)


def _dp_max_min_angle(pts):
    """Interval DP over a convex cycle maximizing the minimum triangle
    angle; returns the triangle list, optimal for convex polygons."""
    n = len(pts)
    dirs = {}

    def direction(j, i):
        key = (j, i)
        out = dirs.get(key)
        if out is None:
            v = geo.log_map(pts[j], pts[i])
            out = dirs[key] = v / geo.norm(v)
        return out

    def angle(i, j, k):
        c = np.clip(geo.minkowski(direction(j, i), direction(j, k)), -1.0, 1.0)
        return float(np.arccos(c))

    def tri_min(i, k, j):
        return min(angle(k, i, j), angle(i, k, j), angle(i, j, k))

    f = [[0.0] * n for _ in range(n)]
    choice = [[None] * n for _ in range(n)]
    for gap in range(1, n):
        for i in range(n - gap):
            j = i + gap
            if gap == 1:
                f[i][j] = np.inf
                continue
            best, arg = -1.0, None
            for k in range(i + 1, j):
                q = min(f[i][k], f[k][j], tri_min(i, k, j))
                if q > best:
                    best, arg = q, k
            f[i][j], choice[i][j] = best, arg
    if f[0][n - 1] <= 0.0:
        raise TriangulationDegenerate("no positive-angle triangulation found")
    triangles = []

    def emit(i, j):
        if j - i < 2:
            return
        k = choice[i][j]
        triangles.append((i, k, j))
        emit(i, k)
        emit(k, j)

    emit(0, n - 1)
    return triangles


def _greedy_chords(pts, klein):
    """Greedy recursive chord split (fallback for nonconvex polygons):
    split along the valid chord maximizing the smallest of the four
    angles against the boundary at its endpoints; ties to shorter chords.
    """
    n = len(pts)
    triangles = []

    def chord_valid(cycle, i, j):
        a, b = klein[cycle[i]], klein[cycle[j]]
        m = len(cycle)
        for t in range(m):
            t2 = (t + 1) % m
            if t in (i, j) or t2 in (i, j):
                continue
            if _segments_cross(a, b, klein[cycle[t]], klein[cycle[t2]]):
                return False
        return _point_in_polygon((a + b) / 2.0, klein)

    def chord_quality(cycle, i, j):
        m = len(cycle)
        angs = []
        for end, other in ((i, j), (j, i)):
            prev_pt = cycle[(end - 1) % m]
            next_pt = cycle[(end + 1) % m]
            angs.append(_interior_angle(pts, cycle[other], cycle[end], next_pt))
            angs.append(_interior_angle(pts, prev_pt, cycle[end], cycle[other]))
        return min(angs)

    def recurse(cycle):
        m = len(cycle)
        if m == 3:
            triangles.append(tuple(cycle))
            return
        best = None
        for i in range(m):
            for j in range(i + 2, m):
                if i == 0 and j == m - 1:
                    continue
                if not chord_valid(cycle, i, j):
                    continue
                cand = (
                    chord_quality(cycle, i, j),
                    -geo.dist(pts[cycle[i]], pts[cycle[j]]),
                    i,
                    j,
                )
                if best is None or cand > best:
                    best = cand
        if best is None:
            raise TriangulationDegenerate("no valid chord found")
        _, _, i, j = best
        recurse(cycle[i : j + 1])
        recurse(cycle[j:] + cycle[: i + 1])

    recurse(list(range(n)))
    return triangles


def _cycle_is_convex(klein):
    n = len(klein)
    sign = 0.0
    for i in range(n):
        o = _orient(klein[i], klein[(i + 1) % n], klein[(i + 2) % n])
        if abs(o) < 1e-14:
            continue
        if sign == 0.0:
            sign = np.sign(o)
        elif np.sign(o) != sign:
            return False
    return True


def triangulate_polygon(polygon, steiner_per_side=2):
    """Triangulate the fundamental polygon with evenly spaced Steiner
    points along the sides, maximizing the smallest triangle angle.

    Fundamental polygons here are convex (interior angles below pi), so
    the exact interval dynamic program applies; a greedy recursive chord
    split handles the nonconvex fallback.
    """
    slots, vertices = _boundary_slots(polygon, steiner_per_side)
    pts = np.stack([p for _, _, p in slots])
    klein = pts[:, :2] / pts[:, 2:3]
    if _cycle_is_convex(klein):
        triangles = _dp_max_min_angle(pts)
    else:
        triangles = _greedy_chords(pts, klein)

    tri_instances = []
    for tri in triangles:
        corners = tuple((slots[t][0], slots[t][1]) for t in tri)
        tri_instances.append(corners)
    mesh = TriangulatedMesh(
        polygon.group, polygon.rep, polygon, vertices, tri_instances, 0, steiner_per_side
    )
    _check_nondegenerate(mesh)
    return mesh


def _point_in_polygon(p, poly):
    """Even-odd ray test in the plane."""
    n = len(poly)
    inside = False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if (a[1] > p[1]) != (b[1] > p[1]):
            xcross = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0])
            if xcross > p[0]:
                inside = not inside
    return inside


def _check_nondegenerate(mesh):
    rho = mesh.rho()
    for tri in mesh.triangles:
        pts = [rho.point(w, mesh.vertices[o].point) for o, w in tri]
        geo.triangle_angles_area(*pts)  # raises DegenerateTriangle


def _dist_ld(a, b):
    """Geodesic distance with extended-precision accumulation.

    The Minkowski square of the difference cancels coordinate-squared
    terms; 80-bit intermediates keep the result accurate for small
    separations at far-out coordinates.
    """
    w = np.asarray(a, dtype=np.longdouble) - np.asarray(b, dtype=np.longdouble)
    s = np.sqrt(max(w[0] ** 2 + w[1] ** 2 - w[2] ** 2, np.longdouble(0.0)))
    return 2.0 * np.arcsinh(s / 2.0)


def _instance_angles(mesh, rho, tri):
    """Interior angles of a triangle instance (side-length based)."""
    pts = [rho.point(w, mesh.vertices[o].point) for o, w in tri]
    la = _dist_ld(pts[1], pts[2])
    lb = _dist_ld(pts[2], pts[0])
    lc = _dist_ld(pts[0], pts[1])
    return geo.triangle_angles_from_sides(la, lb, lc), (la, lb, lc), pts


def _area_from_sides(la, lb, lc):
    s = (la + lb + lc) / 2.0
    t = (
        np.tanh(s / 2.0)
        * np.tanh((s - la) / 2.0)
        * np.tanh((s - lb) / 2.0)
        * np.tanh((s - lc) / 2.0)
    )
    return float(4.0 * np.arctan(np.sqrt(max(t, np.longdouble(0.0)))))


def opposite_angle_sums(mesh, rho=None):
    """Per edge orbit, the sum of the two angles facing it.

    Positive cotangent weight of an edge is equivalent to this sum being
    below pi (the local Delaunay condition).
    """
    rho = rho or mesh.rho()
    edges, index = quotient_edges(mesh, rho)
    sums = np.zeros(len(edges))
    for tri in mesh.triangles:
        angles, _, _ = _instance_angles(mesh, rho, tri)
        for c in range(3):
            (u, wu), (v, wv) = tri[(c + 1) % 3], tri[(c + 2) % 3]
            eid, _ = index.resolve(u, wu, v, wv)
            sums[eid] += angles[c]
    return edges, index, sums


def _flip_one(mesh, pair):
    """Flip the edge shared by the two (triangle, corner) hits, in place."""
    (t1, c1), (t2, c2) = pair
    tri1 = mesh.triangles[t1]
    tri2 = mesh.triangles[t2]
    a, b, cc = tri1[c1], tri1[(c1 + 1) % 3], tri1[(c1 + 2) % 3]
    b2, a2, d2 = tri2[c2], tri2[(c2 + 1) % 3], tri2[(c2 + 2) % 3]
    # tri2's shared edge runs b2 -> a2; the deck element gamma maps
    # tri2's frame into tri1's along the shared edge.
    if a2[0] != a[0] or b2[0] != b[0]:
        raise TriangulationDegenerate("edge instances disagree on vertex orbits")
    gamma = reduce_word(tuple(a[1]) + tuple(word_inverse(a2[1])))
    d = (d2[0], reduce_word(tuple(gamma) + tuple(d2[1])))
    mesh.triangles[t1] = (a, d, cc)
    mesh.triangles[t2] = (d, b, cc)


def make_delaunay(mesh, max_passes=200, margin=1e-9):
    """Flip edges until every opposite-angle pair sums below pi.

    Each pass flips a maximal triangle-disjoint set of violating edges
    (the flip of such an edge is geometrically safe: an angle sum >= pi
    forces the surrounding quad to be convex).  Returns the total number
    of flips; raises `TriangulationDegenerate` if flipping does not
    settle, which would indicate a numerical cycle.
    """
    total = 0
    for _ in range(max_passes):
        rho = mesh.rho()
        edges, index, sums = opposite_angle_sums(mesh, rho)
        bad = np.where(sums >= np.pi - margin)[0]
        if len(bad) == 0:
            return total
        occurrences = {}
        for t, tri in enumerate(mesh.triangles):
            for c in range(3):
                (u, wu), (v, wv) = tri[c], tri[(c + 1) % 3]
                eid, _ = index.resolve(u, wu, v, wv)
                occurrences.setdefault(eid, []).append((t, c))
        used = set()
        flipped = 0
        for eid in bad[np.argsort(-sums[bad])]:
            pair = occurrences.get(int(eid), [])
            if len(pair) != 2 or pair[0][0] == pair[1][0]:
                raise TriangulationDegenerate(f"edge orbit {int(eid)} is not flippable")
            ts = {pair[0][0], pair[1][0]}
            if used.isdisjoint(ts):
                _flip_one(mesh, pair)
                used.update(ts)
                flipped += 1
        total += flipped
    raise TriangulationDegenerate(f"delaunay flipping did not settle after {total} flips")


def refine(mesh):
    """Midpoint refinement: one new vertex orbit per edge orbit, each
    triangle instance replaced by its four children.

    Quotient counts transform as V' = V + E, E' = 2E + 3F, F' = 4F, and
    the new representatives are geodesic midpoints.
    """
    rho = mesh.rho()
    edges, index = quotient_edges(mesh, rho)
    base = len(mesh.vertices)
    vertices = list(mesh.vertices)
    for u, v, w in edges:
        m = geo.midpoint(vertices[u].point, rho.point(w, vertices[v].point))
        vertices.append(MeshVertex("midpoint", m, parents=(u, v, w)))

    def midpoint_slot(cu, cv):
        (u, wu), (v, wv) = cu, cv
        eid, forward = index.resolve(u, wu, v, wv)
        return (base + eid, wu if forward else wv)

    triangles = []
    for tri in mesh.triangles:
        a, b, c = tri
        mab = midpoint_slot(a, b)
        mbc = midpoint_slot(b, c)
        mca = midpoint_slot(c, a)
        triangles += [
            (a, mab, mca),
            (b, mbc, mab),
            (c, mca, mbc),
            (mab, mbc, mca),
        ]
    return TriangulatedMesh(
        mesh.group, mesh.rep, mesh.polygon, vertices, triangles, mesh.depth + 1,
        mesh.steiner_per_side,
    )


def build_mesh(rep, group, depth=2, steiner_per_side=2, delaunay=True):
    """Polygon -> triangulation -> (refine + flip)^depth convenience.

    A Delaunay flip pass runs after the initial triangulation and after
    every refinement: midpoint subdivision of large hyperbolic triangles
    reintroduces opposite-angle pairs above pi, which would break the
    positivity of the cotangent weights.
    """
    poly = optimize_fundamental_polygon(rep, group)
    mesh = triangulate_polygon(poly, steiner_per_side)
    if delaunay:
        make_delaunay(mesh)
    for _ in range(depth):
        mesh = refine(mesh)
        if delaunay:
            make_delaunay(mesh)
    return mesh


# ---------------------------------------------------------------------------
# biweighted quotient graph


@dataclass
class GraphStatistics:
    D: int
    A: float
    Omega: float
    W: float
    U: float
    maxvalence: int


@dataclass
class BiweightedGraph:
    """Quotient graph with cotangent edge weights and area vertex weights.

    ``edges[i] = (u, v, word)`` is the canonical edge-orbit list;
    ``omega[i]`` its weight.  ``points`` are representative positions of
    the vertex orbits (domain geometry), ``mu`` the vertex weights.
    """

    points: np.ndarray
    mu: np.ndarray
    edges: list
    omega: np.ndarray
    genus: int
    depth: int
    vertex_tags: list = field(default_factory=list)

    @property
    def num_vertices(self):
        return len(self.points)

    def adjacency(self):
        """Per-vertex directed neighbor lists [(v, word), ...]."""
        adj = [[] for _ in range(self.num_vertices)]
        for (u, v, w) in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, word_inverse(w)))
        return adj

    def kernel(self, i):
        """Jost kernel eta(u, v) = omega_uv / (2 mu_u mu_v) of edge i."""
        u, v, _ = self.edges[i]
        return float(self.omega[i] / (2.0 * self.mu[u] * self.mu[v]))


def extract_biweighted_graph(mesh, force=False):
    """Cotangent weights and area weights of the quotient graph.

    omega_e = (cot(theta1) + cot(theta2)) / 2 over the two angles facing
    the edge; mu_v = 1/3 of the total area of incident triangles.  A
    nonpositive omega raises `NonAcuteTriangulation` unless ``force``.
    """
    rho = mesh.rho()
    edges, index = quotient_edges(mesh, rho)
    omega = np.zeros(len(edges))
    contribs = np.zeros(len(edges), dtype=int)
    mu = np.zeros(len(mesh.vertices))
    for tri in mesh.triangles:
        # side-length based angle and area formulas: stable for tiny
        # triangles at far-out coordinates, where direction vectors and
        # angle defects cancel catastrophically
        angles, sides, _ = _instance_angles(mesh, rho, tri)
        area = _area_from_sides(*sides)
        for c in range(3):
            mu[tri[c][0]] += area / 3.0
            # edge opposite corner c
            (u, wu), (v, wv) = tri[(c + 1) % 3], tri[(c + 2) % 3]
            eid, _ = index.resolve(u, wu, v, wv)
            omega[eid] += 0.5 / np.tan(angles[c])
            contribs[eid] += 1
    if np.any(contribs != 2):
        raise TriangulationDegenerate("an edge orbit is not shared by two triangles")
    if np.any(omega <= 0):
        bad = int(np.argmin(omega))
        tri = _triangle_with_edge(mesh, index, bad)
        if not force:
            raise NonAcuteTriangulation(
                f"edge orbit {edges[bad][:2]} has weight {omega[bad]:.3e} <= 0",
                triangle=tri,
            )
    points = np.stack([v.point for v in mesh.vertices])
    tags = [v.tag for v in mesh.vertices]
    return BiweightedGraph(
        points, mu, edges, omega, mesh.group.genus, mesh.depth, vertex_tags=tags
    )


def _triangle_with_edge(mesh, index, eid):
    for tri in mesh.triangles:
        for c in range(3):
            (u, wu), (v, wv) = tri[c], tri[(c + 1) % 3]
            if index.resolve(u, wu, v, wv)[0] == eid:
                return tuple(o for o, _ in tri)
    return None


def graph_statistics(graph):
    """Hop diameter (BFS), total/min weights, and the maximum valence."""
    n = graph.num_vertices
    adj = graph.adjacency()
    valences = [len(a) for a in adj]
    ecc = 0
    for src in range(n):
        dist = np.full(n, -1, dtype=int)
        dist[src] = 0
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v, _ in adj[u]:
                    if dist[v] < 0:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = nxt
        if np.any(dist < 0):
            raise GraphDisconnected("quotient graph is not connected")
        ecc = max(ecc, int(dist.max()))
    return GraphStatistics(
        D=ecc,
        A=float(graph.mu.sum()),
        Omega=float(graph.omega.min()),
        W=float(graph.omega.max()),
        U=float(graph.mu.min()),
        maxvalence=int(max(valences)),
    )


def validate_mesh(mesh):
    """Structural audit: local cyclicity and pairing consistency.

    Checks that at every vertex orbit the deduplicated neighbor
    directions sort into a single cycle in which consecutive neighbors
    span a triangle, i.e. the quotient graph is locally cyclic.
    Returns the (V, E, F) counts.
    """
    rho = mesh.rho()
    edges, index = quotient_edges(mesh, rho)
    # directed edges at each orbit, identified by (edge id, orientation)
    neighbors = [dict() for _ in mesh.vertices]  # (eid, fwd) -> point
    for eid, (u, v, w) in enumerate(edges):
        neighbors[u][(eid, True)] = rho.point(w, mesh.vertices[v].point)
        neighbors[v][(eid, False)] = rho.point(word_inverse(w), mesh.vertices[u].point)
    links = [set() for _ in mesh.vertices]
    for tri in mesh.triangles:
        for c in range(3):
            o, wo = tri[c]
            ids = []
            for (v, wv) in (tri[(c + 1) % 3], tri[(c + 2) % 3]):
                eid, fwd = index.resolve(o, wo, v, wv)
                ids.append((eid, fwd))
            links[o].add(frozenset(ids))
    for o, nbrs in enumerate(neighbors):
        keys = list(nbrs)
        base = mesh.vertices[o].point
        e1, e2 = geo.tangent_basis(base)
        angles = []
        for k in keys:
            v = geo.log_map(base, nbrs[k])
            angles.append(np.arctan2(geo.minkowski(v, e2), geo.minkowski(v, e1)))
        order = [keys[i] for i in np.argsort(angles)]
        m = len(order)
        for i in range(m):
            pair = frozenset((order[i], order[(i + 1) % m]))
            if len(pair) == 2 and pair not in links[o]:
                raise AssertionError(
                    f"vertex orbit {o}: consecutive neighbors not spanned by a triangle"
                )
        total = 0.0
        for i in range(m):
            u = geo.log_map(base, nbrs[order[i]])
            v = geo.log_map(base, nbrs[order[(i + 1) % m]])
            total += geo.angle_between(base, u, v)
        if abs(total - 2 * np.pi) > 1e-8:
            raise AssertionError(f"vertex orbit {o}: link angles sum to {total}")
    return len(mesh.vertices), len(edges), len(mesh.triangles)


# ---------------------------------------------------------------------------
# mesh text format


FORMAT_HEADER = "meshgraph/1"


def export_mesh(mesh, graph=None):
    """Line-oriented text form of the quotient mesh.

    One ``v`` line per vertex orbit (id, Minkowski coordinates, tag, then
    the neighbor list as ``orbit:word`` tokens) followed by one ``t``
    line per triangle instance (three ``orbit:word`` corners).  Words use
    generator labels with leading uppercase for inverses, ``-`` for the
    identity.
    """
    labels = mesh.group.labels
    if graph is None:
        graph = extract_biweighted_graph(mesh, force=True)
    adj = graph.adjacency()
    lines = [
        f"{FORMAT_HEADER} genus={mesh.group.genus} depth={mesh.depth} "
        f"steiner={mesh.steiner_per_side} vertices={len(mesh.vertices)} "
        f"edges={len(graph.edges)} triangles={len(mesh.triangles)}"
    ]
    for i, mv in enumerate(mesh.vertices):
        x1, x2, x3 = (repr(float(x)) for x in mv.point)
        nbrs = " ".join(f"{v}:{word_str(w, labels)}" for v, w in adj[i])
        lines.append(f"v {i} {x1} {x2} {x3} {mv.tag} {nbrs}")
    for tri in mesh.triangles:
        corners = " ".join(f"{o}:{word_str(w, labels)}" for o, w in tri)
        lines.append(f"t {corners}")
    return "\n".join(lines) + "\n"


def parse_mesh_text(text, labels):
    """Parse `export_mesh` output into (header, vertices, adjacency, triangles)."""
    lines = [ln for ln in text.strip().split("\n") if ln]
    head = lines[0].split()
    if head[0] != FORMAT_HEADER:
        raise ValueError(f"unknown mesh format {head[0]!r}")
    header = dict(kv.split("=") for kv in head[1:])
    verts, adj, tris = [], [], []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "v":
            verts.append((int(parts[1]), np.array([float(parts[2]), float(parts[3]), float(parts[4])]), parts[5]))
            adj.append([(int(tok.split(":")[0]), parse_word(tok.split(":")[1], labels)) for tok in parts[6:]])
        elif parts[0] == "t":
            tris.append(tuple((int(tok.split(":")[0]), parse_word(tok.split(":")[1], labels)) for tok in parts[1:]))
    return header, verts, adj, tris
