"""Exception hierarchy shared across the package."""


class FireFrontError(Exception):
    """Base class for all errors raised by firefront."""


class NonSpd(FireFrontError):
    """A matrix expected to be symmetric positive-definite is not."""


class NonNavigable(FireFrontError):
    """Wind is too strong at a point: h(W,W) >= 1 (or numerically so)."""


class ZeroDirection(FireFrontError):
    """A direction argument that must be nonzero was zero."""


class ZeroBaseVector(FireFrontError):
    """The base vector of the fundamental tensor must be nonzero."""


class ZeroVector(FireFrontError):
    """A vector argument that must be nonzero was zero."""


class StepFailure(FireFrontError):
    """Numerical integration produced non-finite state."""


class SingularMetric(FireFrontError):
    """Metric matrix is not invertible where an inverse is required."""


class ModeMismatch(FireFrontError):
    """A tracing mode was requested that the wind field does not support."""


class DegenerateTangent(FireFrontError):
    """Front tangents are zero or linearly dependent at a parameter."""


class GridTooCoarse(FireFrontError):
    """Grid resolution is too low to extract a usable front."""


class EmptyFan(FireFrontError):
    """A direction fan was empty."""


class Unreachable(FireFrontError):
    """Target point or region could not be reached within the horizon."""


class OutOfHorizon(FireFrontError):
    """A requested time lies outside the computed trajectory."""


class ParseError(FireFrontError):
    """Scenario text could not be parsed."""


class ValidationError(FireFrontError):
    """Scenario parsed but violates an invariant."""


class IoError(FireFrontError):
    """Output could not be written."""


class EmptyIntersection(FireFrontError):
    """Requested slice plane does not intersect any front."""
