class SecestError(Exception):
    """Base class for errors raised by this package."""


class DimensionError(SecestError, ValueError):
    pass


class UnobservableSystem(SecestError):
    """The observability stack is rank deficient, so x(0) is not identifiable."""


class NotCorrectable(SecestError):
    """No finite window certifies correction of the requested number of errors."""


class SingularInnovation(SecestError, ArithmeticError):
    pass


class RiccatiNotConverged(SecestError):
    pass


class PlacementError(SecestError):
    def __init__(self, msg, residual=None):
        super().__init__(msg)
        self.residual = residual


class MaxTriesExceeded(SecestError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class ConfigError(SecestError, ValueError):
    pass
