"""Exception types shared across the package.

Every failure mode that callers are expected to catch gets its own class,
so tests and the CLI can distinguish "bad input data" from "numerics gave
up" without string matching.
"""


class GHLabError(Exception):
    """Base class for all package errors."""


class InvalidZeroError(GHLabError):
    """Blaschke zero outside the punctured open disc."""


class PoleError(GHLabError):
    """Evaluation hit (or underflowed into) a pole of a disc automorphism."""


class BranchDomainError(GHLabError):
    """Square-root argument left the right half-plane branch domain."""


class InvalidMuError(GHLabError):
    """Post-composition map failed its range validation."""


class InvalidDataError(GHLabError):
    """Holomorphic data violates a positivity requirement (Im psi, Im phi)."""


class PunctureError(GHLabError):
    """Point maps to one of the three punctures (cusp of the covering)."""


class ConvergenceError(GHLabError):
    """A series or reduction loop failed to converge within its budget."""


class SizeError(GHLabError):
    """Requested enumeration exceeds the desk-scale guard."""


class DegenerateMetricError(GHLabError):
    """Assembled metric failed its positive-definiteness check."""


class DegenerateFrameError(GHLabError):
    """Coframe solve was too ill-conditioned to trust."""


class StencilError(GHLabError):
    """A finite-difference stencil point could not be evaluated."""


class PathError(GHLabError):
    """Quadrature along a path failed (singular point on the path)."""


class RegionError(GHLabError):
    """A path left the region its check requires it to stay in."""


class ConfigError(GHLabError):
    """Experiment configuration failed schema validation."""
