"""Exception hierarchy shared by every impactlab module."""


class ImpactlabError(Exception):
    """Base class for all errors raised by impactlab."""


class ConfigError(ImpactlabError, ValueError):
    """Invalid or unknown configuration content."""


class DomainError(ImpactlabError, ValueError):
    """Argument outside the mathematical domain of a function."""


class NumericalError(ImpactlabError):
    """Base class for failures of the numerical model itself."""


class KernelOverflowError(NumericalError, OverflowError):
    """The impact kernel is not representable as a finite float."""


class PositivityViolationError(NumericalError, ValueError):
    """An impact value is not strictly positive."""


class NonEquilibriumError(NumericalError):
    """A friction series does not define a finite equilibrium index."""


class DegenerateWindowError(NumericalError, ValueError):
    """A regression window has no spread in its regressor."""


class NoFairPricingError(NumericalError, ValueError):
    """The relaxation profile never decays down to the requested level."""


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget."""
