"""Exception hierarchy shared by every nctheta module."""


class NcThetaError(Exception):
    """Base class for all library errors."""


class DimensionError(NcThetaError, ValueError):
    pass


class PreconditionError(NcThetaError, ValueError):
    pass


class PositivityError(PreconditionError):
    """A quadratic form that must be positive definite is not."""


class SingularityError(NcThetaError, ArithmeticError):
    pass


class DegeneracyError(SingularityError):
    pass


class ConvergenceError(NcThetaError, ArithmeticError):
    """A truncation radius beyond the configured budget would be needed."""


class BudgetError(NcThetaError, ArithmeticError):
    """Polynomial degree budget exceeded."""


class NearZeroError(NcThetaError, ArithmeticError):
    """Division by a quantity that is numerically zero."""

    def __init__(self, message, unnormalized=None):
        super().__init__(message)
        self.unnormalized = unnormalized


class DomainError(PreconditionError):
    pass


class AliasingError(NcThetaError, ArithmeticError):
    pass


class CompositionError(NcThetaError, ValueError):
    pass


class UnsupportedGeneratorError(NcThetaError, ValueError):
    pass
