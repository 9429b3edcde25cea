"""Exception hierarchy shared by all hardylab modules."""


class HardyLabError(Exception):
    """Base class for every error raised by the package."""


class OutOfRange(HardyLabError, ValueError):
    """A problem parameter violates its admissible window.

    Attributes
    ----------
    field : str
        Name of the offending parameter.
    value : float
        The rejected value.
    window : str
        Human readable statement of the violated inequality.
    """

    def __init__(self, field, value, window):
        self.field = field
        self.value = value
        self.window = window
        super().__init__(f"{field}={value!r} violates {window}")


class NearThreshold(OutOfRange):
    """mu is so close to the Hardy threshold that the two decay roots merge."""


class NoConvergence(HardyLabError, RuntimeError):
    """An iterative routine exhausted its budget."""


class DomainError(HardyLabError, ValueError):
    """Evaluation requested at a point where the quantity is undefined."""


class GridUnderflow(HardyLabError, ValueError):
    """Resampling asked for radii outside the source grid."""


class GridCoverage(HardyLabError, ValueError):
    """A ball or annulus is not covered by the profile grid."""


class InsufficientRange(HardyLabError, ValueError):
    """A profile or window is too short for the requested fit."""


class QuadratureFailure(HardyLabError, RuntimeError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NonConvergentLimit(HardyLabError, RuntimeError):
    """Windowed limit estimates are not Cauchy."""


class Overflow(HardyLabError, OverflowError):
    """Moser exponent grew beyond what double precision can represent."""


class SolverError(HardyLabError, RuntimeError):
    """Base class for failures of the radial shooting integrator."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BlowUp(SolverError):
    pass


class SignChange(SolverError):
    pass


class BudgetExceeded(SolverError):
    pass


class NewtonDiverged(HardyLabError, RuntimeError):
    """Damped Newton stalled; ``last`` holds the last iterate."""

    def __init__(self, message, last=None, diagnostics=None):
        super().__init__(message)
        self.last = last
        self.diagnostics = dict(diagnostics or {})


class SingularJacobian(HardyLabError, RuntimeError):
    pass


class ConfigError(HardyLabError, ValueError):
    """Malformed or unknown configuration entry."""
