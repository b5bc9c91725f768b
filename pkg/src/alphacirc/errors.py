class AlphaCircError(Exception):
    """Base class for every error raised by the alphacirc package."""


class DomainError(AlphaCircError, ValueError):
    """An operation was called outside its mathematical domain."""


class ConfigurationError(AlphaCircError, ValueError):
    """Invalid configuration file, CLI input or quadrature setup."""


class NumericalError(AlphaCircError, ArithmeticError):
    """A numerical procedure produced non-finite values or failed to converge."""


class ConvergenceError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass
