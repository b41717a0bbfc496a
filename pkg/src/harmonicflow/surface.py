"""Genus-g surface groups and Fenchel-Nielsen coordinates.

The fundamental group is presented on generators a1, b1, ..., ag, bg with
the single relator [a1,b1]...[ag,bg].  Hyperbolic structures are entered
as Fenchel-Nielsen coordinates for a fixed pants decomposition:

* the surface is a collection of g one-holed tori ("handles") hanging off
  a central g-holed sphere,
* handle i is a pair of pants with two boundary circles glued to each
  other (an HNN extension); the glued curve is ``gamma_i``, freely
  homotopic to ``a_i``,
* the handle boundaries ``delta_i`` (the curves of [a_i, b_i]) bound the
  central sphere, which is split into pants along curves ``e_1, ...`` by
  a balanced binary recursion (keeping gluing words O(log g) deep),
* genus 2 degenerates: the central sphere is an annulus, so the two
  handles share a single curve ``delta``.

Curve order in coordinate vectors: gamma_1..gamma_g, then delta (genus 2)
or delta_1..delta_g, then the central split curves in recursion
(pre-order) order; 3g-3 curves total.

Pair-of-pants matrices come from the right-angled hexagon relation: the
two generators translate along axes whose common perpendicular is the
seam length determined by the three boundary half-lengths.  Gluings are
matrices aligning one hyperbolic axis onto another, composed with a
translation along the target axis by the twist parameter (positive twist
translates in the direction of the glued curve's oriented image; the
convention is fixed here and exercised only through convention-free
quantities in tests).
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotHyperbolic, RepresentationInconsistent, UnsupportedGenus
from .geometry import Isometry

# Words are tuples of nonzero ints: +k is generator k-1, -k its inverse.
Word = tuple


def word_inverse(w):
    return tuple(-x for x in reversed(w))


def reduce_word(w):
    out = []
    for x in w:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


def concat(*words):
    return reduce_word(tuple(x for w in words for x in w))


def commutator(u, v):
    return concat(u, v, word_inverse(u), word_inverse(v))


def word_str(w, labels):
    """Human-readable form, e.g. ``a1*B1`` (leading uppercase = inverse)."""
    if not w:
        return "-"
    parts = []
    for x in w:
        lab = labels[abs(x) - 1]
        parts.append(lab if x > 0 else lab[0].upper() + lab[1:])
    return "*".join(parts)


def parse_word(s, labels):
    if s == "-":
        return ()
    index = {lab: k + 1 for k, lab in enumerate(labels)}
    out = []
    for part in s.split("*"):
        inv = part[0].isupper()
        lab = part[0].lower() + part[1:]
        if lab not in index:
            raise ValueError(f"unknown generator {part!r}")
        out.append(-index[lab] if inv else index[lab])
    return tuple(out)


@dataclass
class PantsNode:
    """One pair of pants of the decomposition (bookkeeping only)."""

    name: str
    boundaries: tuple  # three curve names


@dataclass
class SurfaceGroup:
    """Combinatorial data of the genus-g surface group."""

    genus: int
    labels: list
    relator: Word
    curves: dict  # name -> Word (pants curves as words in the generators)
    curve_order: list  # names in coordinate-vector order
    pants: list  # PantsNode list, length 2g-2

    def generator_word(self, label):
        return (self.labels.index(label) + 1,)

    @property
    def num_curves(self):
        return len(self.curve_order)


def build_surface_group(genus):
    """Construct the abstract surface group and its pants decomposition."""
    if not isinstance(genus, (int, np.integer)) or genus < 2:
        raise UnsupportedGenus(f"genus {genus!r} must be an integer >= 2")
    labels = []
    for i in range(1, genus + 1):
        labels += [f"a{i}", f"b{i}"]
    a = [(2 * i + 1,) for i in range(genus)]
    b = [(2 * i + 2,) for i in range(genus)]
    handles = [commutator(a[i], b[i]) for i in range(genus)]
    relator = concat(*handles)

    curves = {}
    order = []
    pants = []
    for i in range(genus):
        curves[f"gamma{i + 1}"] = a[i]
        order.append(f"gamma{i + 1}")

    if genus == 2:
        curves["delta"] = handles[0]
        order.append("delta")
        pants.append(PantsNode("handle1", ("gamma1", "gamma1", "delta")))
        pants.append(PantsNode("handle2", ("gamma2", "gamma2", "delta")))
    else:
        for i in range(genus):
            curves[f"delta{i + 1}"] = handles[i]
            order.append(f"delta{i + 1}")
            pants.append(
                PantsNode(f"handle{i + 1}", (f"gamma{i + 1}", f"gamma{i + 1}", f"delta{i + 1}"))
            )
        # Balanced pre-order recursion over the central sphere.  Boundary
        # descriptors are either ("d", i) for delta_{i+1} or ("e", lo, hi)
        # for a split curve covering handles lo..hi-1; split-curve words
        # are contiguous products of handle boundary words.
        counter = [0]

        def handle_range(bounds):
            lo = min(b[1] for b in bounds)
            hi = max(b[1] + 1 if b[0] == "d" else b[2] for b in bounds)
            return lo, hi

        def bname(bd):
            return f"delta{bd[1] + 1}" if bd[0] == "d" else bd[3]

        def descend(bounds):
            k = len(bounds)
            if k == 3:
                lo, hi = handle_range(bounds)
                pants.append(PantsNode(f"sphere{lo + 1}-{hi}", tuple(bname(x) for x in bounds)))
                return
            mid = (k + 1) // 2
            left, right = bounds[:mid], bounds[mid:]
            lo, hi = handle_range(left)
            counter[0] += 1
            name = f"e{counter[0]}"
            curves[name] = concat(*[handles[j] for j in range(lo, hi)])
            order.append(name)
            e = ("e", lo, hi, name)
            descend(left + [e])
            descend([e] + right)

        descend([("d", i) for i in range(genus)])

    return SurfaceGroup(genus, labels, relator, curves, order, pants)


@dataclass
class FNCoordinates:
    """3g-3 curve lengths (> 0) and twists, in `SurfaceGroup.curve_order`."""

    lengths: np.ndarray
    twists: np.ndarray

    def __post_init__(self):
        self.lengths = np.asarray(self.lengths, dtype=float)
        self.twists = np.asarray(self.twists, dtype=float)
        if self.lengths.ndim != 1 or self.lengths.shape != self.twists.shape:
            raise ValueError("lengths and twists must be 1d arrays of equal size")
        if np.any(self.lengths <= 0):
            raise ValueError("all Fenchel-Nielsen lengths must be positive")


# ---------------------------------------------------------------------------
# matrix building blocks
#
# The assembly below runs in extended precision (np.longdouble): generator
# matrices of glued pieces transiently acquire large entries, and the
# relator-defect budget of the final float64 output is set by rounding of
# those entries times the conditioning of the relator word.

_DTYPE = np.longdouble


def _mat(a, b, c, d):
    return np.array([[a, b], [c, d]], dtype=_DTYPE)


def _inv(m):
    return np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])


def _conj(g, m):
    return g @ m @ _inv(g)


def pants_matrices(l1, l2, l3):
    """Generators (X1, X2, X3) of a hyperbolic pair of pants.

    X1*X2*X3 = 1 exactly, tr Xi = -2 cosh(li/2), and the axes of X1 and
    X2 sit at the seam distance prescribed by the right-angled hexagon
    relation, making the triple the holonomy of a hyperbolic pair of
    pants with boundary lengths (l1, l2, l3).
    """
    a1, a2, a3 = l1 / 2.0, l2 / 2.0, l3 / 2.0
    coshu = (np.cosh(a3) + np.cosh(a1) * np.cosh(a2)) / (np.sinh(a1) * np.sinh(a2))
    u = np.arccosh(coshu)
    X1 = _mat(-np.exp(a1), 0.0, 0.0, -np.exp(-a1))
    K = _mat(np.cosh(u / 2), np.sinh(u / 2), np.sinh(u / 2), np.cosh(u / 2))
    X2 = K @ _mat(-np.exp(-a2), 0.0, 0.0, -np.exp(a2)) @ _inv(K)
    return X1, X2, _inv(X1 @ X2)


def _traceless_part(m):
    """N with m = sign(tr) (cosh(l/2) I + sinh(l/2) N), N^2 = I."""
    tr = m[0, 0] + m[1, 1]
    if abs(tr) < 2.0 - 1e-9:
        raise NotHyperbolic(f"|trace| = {abs(tr):.6f} < 2")
    sigma = 1.0 if tr >= 0 else -1.0
    half = np.arccosh(max(abs(tr) / 2.0, _DTYPE(1.0)))
    s = np.sinh(half)
    if s < 1e-12:
        raise NotHyperbolic("translation length numerically zero")
    return (sigma * m - np.cosh(half) * np.eye(2, dtype=_DTYPE)) / s, 2.0 * half


def axis_translation(m, t):
    """Translation by signed length t along the oriented axis of m."""
    m = np.asarray(m, dtype=_DTYPE)
    n, _ = _traceless_part(m)
    t = _DTYPE(t)
    return np.cosh(t / 2.0) * np.eye(2, dtype=_DTYPE) + np.sinh(t / 2.0) * n


def _eigvec(n, val):
    """Unit eigenvector of the traceless involution n for eigenvalue +-1."""
    m = n + val * np.eye(2, dtype=_DTYPE)  # columns span the eigenspace
    c0, c1 = np.sqrt(m[0, 0] ** 2 + m[1, 0] ** 2), np.sqrt(m[0, 1] ** 2 + m[1, 1] ** 2)
    c = m[:, 0] / c0 if c0 >= c1 else m[:, 1] / c1
    return c


def align(y, z):
    """m in SL(2,R) with m y m^{-1} = +-z, matching oriented axes.

    Both arguments must be hyperbolic with equal translation lengths; the
    attracting fixed point of y maps to the attracting fixed point of z.
    """
    y = np.asarray(y, dtype=_DTYPE)
    z = np.asarray(z, dtype=_DTYPE)
    ny, ly = _traceless_part(y)
    nz, lz = _traceless_part(z)
    if abs(ly - lz) > 1e-8 * max(1.0, float(ly)):
        raise ValueError(f"cannot align axes of lengths {float(ly):.6f} != {float(lz):.6f}")
    ps = []
    for n in (ny, nz):
        p = np.column_stack([_eigvec(n, 1.0), _eigvec(n, -1.0)])
        det = p[0, 0] * p[1, 1] - p[0, 1] * p[1, 0]
        if det < 0:
            p[:, 1] = -p[:, 1]
            det = -det
        ps.append(p / np.sqrt(det))
    return ps[1] @ _inv(ps[0])


def _minkowski_3x3(m):
    """Induced Minkowski 3x3 action of a 2x2 matrix (same dtype)."""
    a, b, c, d = m.ravel()
    cols = []
    for s11, s12, s22 in ((0.0, 1.0, 0.0), (1.0, 0.0, -1.0), (1.0, 0.0, 1.0)):
        t11 = a * a * s11 + 2.0 * a * b * s12 + b * b * s22
        t12 = a * c * s11 + (a * d + b * c) * s12 + b * d * s22
        t22 = c * c * s11 + 2.0 * c * d * s12 + d * d * s22
        cols.append([t12, (t11 - t22) / 2.0, (t11 + t22) / 2.0])
    return np.array(cols).T


def _centering_matrix(mats, words, labels):
    """Matrix moving the displacement-optimal basepoint to the origin.

    The relator defect of the rounded float64 output is governed by the
    norms of the relator *prefix* matrices, which are e^{O(displacement
    of the basepoint)}.  The total displacement cost
    sum_w cosh d(z, w z) is a Minkowski-quadratic form in z, so its
    minimizer over the hyperboloid is the timelike eigenvector of a 3x3
    matrix.  Returns a 2x2 matrix g (conjugating by g recenters), or
    None when the cost is degenerate.
    """
    q = np.zeros((3, 3))
    eta = np.diag([1.0, 1.0, -1.0])
    for w in words:
        m = np.eye(2, dtype=_DTYPE)
        for x in w:
            gm = mats[labels[abs(x) - 1]]
            m = m @ (gm if x > 0 else _inv(gm))
        mk = _minkowski_3x3(m).astype(float)
        q -= (mk.T @ eta + eta @ mk) / 2.0
    evals, evecs = np.linalg.eig(eta @ (q + q.T) / 2.0)  # critical points: Qz = lambda eta z
    p = None
    for i in range(3):
        v = np.real(evecs[:, i])
        if v[0] ** 2 + v[1] ** 2 - v[2] ** 2 < 0:
            p = v if v[2] > 0 else -v
            break
    if p is None:  # degenerate cost
        return None
    p = p.astype(_DTYPE)
    p = p / np.sqrt(-(p[0] ** 2 + p[1] ** 2 - p[2] ** 2))
    # Symmetric-model square root: the symmetric matrix of p is
    # S = [[x3+x2, x1], [x1, x3-x2]]; S^{-1/2} maps p to the origin.
    s_mat = np.array([[p[2] + p[1], p[0]], [p[0], p[2] - p[1]]], dtype=_DTYPE)
    root = (s_mat + np.eye(2, dtype=_DTYPE)) / np.sqrt(s_mat[0, 0] + s_mat[1, 1] + 2.0)
    return _inv(root)


# ---------------------------------------------------------------------------
# representation assembly


def _handle(l_gamma, l_delta, twist_gamma, frame=None):
    """Holonomy of a one-holed torus: returns (A, B, boundary matrix).

    A pair of pants with boundary lengths (l_gamma, l_gamma, l_delta) has
    its first two boundary circles glued to each other by a stable letter
    t with t X2 t^{-1} = X1^{-1}; a := X1 and b := t^{-1} then satisfy
    [a, b] = X1 X2, hyperbolic of translation length l_delta.  ``frame``
    optionally conjugates the standard-position pants before gluing.
    """
    x1, x2, _ = pants_matrices(l_gamma, l_gamma, l_delta)
    if frame is not None:
        x1, x2 = _conj(frame, x1), _conj(frame, x2)
    t = axis_translation(x1, twist_gamma) @ align(x2, _inv(x1))
    return x1, _inv(t), x1 @ x2


def _sphere_targets(lengths, take, frame=None):
    """Matrices (T_1..T_k) with product +-1 and tr T_i = +-2cosh(L_i/2).

    ``take()`` yields the (length, twist) pair of the next split curve in
    pre-order; the recursion shape must match `build_surface_group`.
    ``frame`` conjugates the anchor pants, and thereby the whole sphere.
    """
    k = len(lengths)
    if k == 3:
        z1, z2, z3 = pants_matrices(*lengths)
        if frame is not None:
            z1, z2, z3 = (_conj(frame, z) for z in (z1, z2, z3))
        return [z1, z2, z3]
    mid = (k + 1) // 2
    le, te = take()
    left = _sphere_targets(list(lengths[:mid]) + [le], take, frame)
    right = _sphere_targets([le] + list(lengths[mid:]), take)
    t_e_inv = _inv(left[-1])
    n = axis_translation(t_e_inv, te) @ align(right[0], t_e_inv)
    return left[:-1] + [_conj(n, m) for m in right[1:]]


def _assemble(group, L, T, frame=None):
    """One assembly pass; returns the raw longdouble generator family."""
    g = group.genus
    delta_names = ["delta", "delta"] if g == 2 else [f"delta{i + 1}" for i in range(g)]
    handle_parts = [
        _handle(
            L[f"gamma{i + 1}"],
            L[delta_names[i]],
            T[f"gamma{i + 1}"],
            frame=frame if (g == 2 and i == 0) else None,
        )
        for i in range(g)
    ]

    if g == 2:
        d1_inv = _inv(handle_parts[0][2])
        m = axis_translation(d1_inv, T["delta"]) @ align(handle_parts[1][2], d1_inv)
        conjugators = [np.eye(2, dtype=_DTYPE), m]
    else:
        split_params = iter([(L[n], T[n]) for n in group.curve_order if n.startswith("e")])
        targets = _sphere_targets(
            [L[n] for n in delta_names], lambda: next(split_params), frame
        )
        conjugators = [
            axis_translation(targets[i], T[delta_names[i]]) @ align(handle_parts[i][2], targets[i])
            for i in range(g)
        ]

    raw = {}
    for i in range(g):
        a, b, _ = handle_parts[i]
        raw[f"a{i + 1}"] = _conj(conjugators[i], a)
        raw[f"b{i + 1}"] = _conj(conjugators[i], b)
    return raw


def fn_to_representation(group, fn, tol=1e-8):
    """Translate Fenchel-Nielsen coordinates into a Fuchsian representation.

    Returns a dict label -> `Isometry` on the standard generators.
    Raises `RepresentationInconsistent` when the relator image strays
    from +-identity beyond ``tol``, or when a generator image fails to be
    hyperbolic.

    Two passes: the first finds the displacement-optimal basepoint, the
    second re-runs the assembly anchored there, so that no intermediate
    matrix ever has large entries (they would otherwise dominate the
    relator defect through rounding).
    """
    g = group.genus
    if len(fn.lengths) != 3 * g - 3:
        raise ValueError(f"expected {3 * g - 3} coordinates, got {len(fn.lengths)}")
    L = {name: _DTYPE(fn.lengths[i]) for i, name in enumerate(group.curve_order)}
    T = {name: _DTYPE(fn.twists[i]) for i, name in enumerate(group.curve_order)}

    prefixes = [group.relator[:k] for k in range(1, len(group.relator))]
    raw = _assemble(group, L, T)
    center = _centering_matrix(raw, prefixes, group.labels)
    if center is not None:
        raw = _assemble(group, L, T, frame=center)
    mats = {k: Isometry(np.asarray(m, dtype=float)) for k, m in raw.items()}

    defect = relator_defect(group, mats)
    if defect > tol:
        raise RepresentationInconsistent(f"relator defect {defect:.3e} > {tol:g}")
    for lab in group.labels:
        if abs(mats[lab].trace()) <= 2.0:
            raise RepresentationInconsistent(f"generator {lab} image is not hyperbolic")
    return mats


def word_matrix(rep, word, labels=None):
    """Raw 2x2 product of generator images along a word."""
    if labels is None:
        labels = sorted(rep.keys(), key=lambda s: (int(s[1:]), s[0]))
    m = np.eye(2)
    for x in word:
        gm = rep[labels[abs(x) - 1]].m
        m = m @ (gm if x > 0 else _inv(gm))
    return m


def evaluate_word(rep, word, labels=None):
    """Product of generator images along a word; returns an `Isometry`."""
    return Isometry(word_matrix(rep, word, labels))


def relator_defect(group, rep):
    """max-entry distance of the relator image from the nearer of +-I."""
    m = word_matrix(rep, group.relator, group.labels)
    eye = np.eye(2)
    return float(min(np.abs(m - eye).max(), np.abs(m + eye).max()))


def translation_length(iso):
    """2*arccosh(|tr|/2) for a hyperbolic isometry (0 for +-identity)."""
    tr = abs(iso.trace())
    if np.abs(iso.m - np.eye(2)).max() < 1e-12 or np.abs(iso.m + np.eye(2)).max() < 1e-12:
        return 0.0
    if tr < 2.0:
        raise NotHyperbolic(f"|trace| = {tr:.6f} < 2")
    return float(2.0 * np.arccosh(max(tr / 2.0, 1.0)))


def curve_traces(group, rep):
    """|trace| of every pants-curve image, keyed by curve name."""
    return {
        name: float(abs(np.trace(word_matrix(rep, word, group.labels))))
        for name, word in group.curves.items()
    }
