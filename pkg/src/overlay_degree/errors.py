"""Exception hierarchy shared by all modules."""


class OverlayModelError(Exception):
    """Base class for every error raised by this package."""


class NonPositiveRate(OverlayModelError, ValueError):
    pass


class InvalidParams(OverlayModelError, ValueError):
    pass


class ParamsTooLarge(InvalidParams):
    pass


class NumericalInstability(OverlayModelError, ArithmeticError):
    pass


class IndexOutOfRange(OverlayModelError, IndexError):
    pass


class UndefinedForZeroZ1(OverlayModelError, ValueError):
    pass


class NoGiantComponent(OverlayModelError, ValueError):
    """Raised when z2 <= z1, where the diameter estimate has no meaning."""


class ConfigError(OverlayModelError, ValueError):
    pass
