"""Exception hierarchy shared by all symgauge modules."""


class SymgaugeError(Exception):
    """Base class for every error raised by this package."""


class InvalidFieldError(SymgaugeError, ValueError):
    """Field samples have the wrong shape or are not finite."""


class GridMismatchError(SymgaugeError, ValueError):
    """Two operands live on different grids."""


class UnsolvableOnTorusError(SymgaugeError, ValueError):
    """An inverse operator was applied to data with a nonzero spatial mean."""

    def __init__(self, message, mean=None):
        super().__init__(message)
        self.mean = mean


class ConstraintViolationError(SymgaugeError, ValueError):
    """A differential constraint (div B = 0, Lorentz, Gauss, ...) is violated."""

    def __init__(self, message, measured=None):
        super().__init__(message)
        self.measured = measured


class StepSizeError(SymgaugeError, ValueError):
    """Time step is non-positive or exceeds the stability bound."""

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound


class FeatureNotEnabledError(SymgaugeError, RuntimeError):
    """A diagnostic needs an optional track that was not switched on."""


class InvalidPolarizationError(SymgaugeError, ValueError):
    """Plane-wave polarization is not transverse to the wavevector."""


class DimensionMismatchError(SymgaugeError, ValueError):
    """Phase-space, base or algebra dimensions do not agree."""


class WrongModeError(SymgaugeError, ValueError):
    """A gauge field is in a mode that does not support the request."""


class ChartError(SymgaugeError, ValueError):
    """A phase point carries the wrong chart tag."""


class PreconditionError(SymgaugeError, ValueError):
    """A documented mathematical precondition does not hold."""


class BlowUpError(SymgaugeError, FloatingPointError):
    """Integration produced non-finite values."""

    def __init__(self, message, last_valid_step=None, last_valid_state=None):
        super().__init__(message)
        self.last_valid_step = last_valid_step
        self.last_valid_state = last_valid_state


class ConfigError(SymgaugeError, ValueError):
    """Scenario configuration is malformed; ``field`` names the offending key."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class UnknownScenarioError(ConfigError):
    """Requested scenario name is not registered."""
