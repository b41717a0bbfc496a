"""Discrete equivariant harmonic maps between hyperbolic surfaces.

The package computes the unique discrete equivariant harmonic map for a
pair of hyperbolic structures given in Fenchel-Nielsen coordinates, via
three provably convergent iterations (fixed-stepsize heat flow,
optimal-stepsize heat flow, center-of-mass averaging), and ships a
numerical certification suite for the underlying convexity formulas,
convergence constants, and mean-value asymptotics.
"""

from . import errors, geometry, surface, meshing, flow, verify, pipeline, snapshots, suites  # noqa: F401

__version__ = "0.1.0"
