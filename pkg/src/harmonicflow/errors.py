"""Exception hierarchy for the harmonicflow package."""


class HarmonicFlowError(Exception):
    """Base class for all package errors."""


class CoordinateOverflow(HarmonicFlowError):
    """A point drifted too far on the hyperboloid for double precision."""


class DegenerateTriangle(HarmonicFlowError):
    """Triangle vertices are (numerically) collinear."""


class DegenerateQuadrilateral(HarmonicFlowError):
    """A quadrilateral side collapsed to a point."""


class BarycenterDiverged(HarmonicFlowError):
    """Karcher barycenter iteration failed to reach tolerance."""


class UnsupportedGenus(HarmonicFlowError):
    """Surface genus must be at least 2."""


class RepresentationInconsistent(HarmonicFlowError):
    """Relator image too far from the identity."""


class NotHyperbolic(HarmonicFlowError):
    """Isometry is elliptic or parabolic where a hyperbolic one is required."""


class PolygonOptimizationFailed(HarmonicFlowError):
    """Newton iteration for the fundamental polygon did not converge."""


class PolygonSelfIntersecting(HarmonicFlowError):
    """Fundamental polygon boundary crosses itself at the optimum."""


class TriangulationDegenerate(HarmonicFlowError):
    """Polygon triangulation produced a degenerate triangle."""


class NonAcuteTriangulation(HarmonicFlowError):
    """A cotangent edge weight came out nonpositive.

    Carries the offending triangle's vertex orbits in ``triangle``.
    """

    def __init__(self, message, triangle=None):
        super().__init__(message)
        self.triangle = triangle


class GraphDisconnected(HarmonicFlowError):
    """Quotient graph is not connected."""


class InitialMapMismatch(HarmonicFlowError):
    """Domain and target constructions do not share combinatorics."""


class LineSearchFailed(HarmonicFlowError):
    """Stepsize line search could not bracket or converge."""


class StepsizeOutOfRange(HarmonicFlowError):
    """A stepsize outside the provably safe range was requested."""


class FlowNotConverged(HarmonicFlowError):
    """Flow hit the iteration cap before reaching tolerance.

    Carries the partial ``trajectory`` so callers can inspect it.
    """

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class QuadratureFailed(HarmonicFlowError):
    """Ball-average quadrature did not stabilize."""
