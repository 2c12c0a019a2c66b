"""Exception types shared across the package."""


class DclError(Exception):
    """Base class for all errors raised by this package."""


class OutOfTubularNeighborhood(DclError):
    """A point left the tube where the nearest-point projection is trusted.

    Raised by the flow guards; usually signals blow-up or a too-large
    time step.
    """


class PointOffManifold(DclError):
    """A point that should lie on the target violates its constraint."""


class TangencyViolation(DclError):
    """A field that should be tangent has a too-large normal component."""


class NoContraction(DclError):
    """The fixed-point iteration failed to converge (dt too large for this epsilon)."""


class StepSizeUnstable(DclError):
    """Runaway norm growth detected by the blow-up guard."""


class WrongManifold(DclError):
    """Operation requested on a target it is not defined for."""


class UnsupportedCoefficients(DclError):
    """Closed-form reference solution not available for these coefficients."""


class ConfigError(DclError):
    """Invalid configuration or manifest (CLI exit code 2)."""
