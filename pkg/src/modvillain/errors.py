"""Exception types shared across the package."""


class ModVillainError(Exception):
    pass


class DomainError(ModVillainError, ValueError):
    """An argument violates an operation's precondition."""


class IntegrityError(ModVillainError, ArithmeticError):
    """An internal consistency check failed (saturation, residual, definiteness)."""


class PrecisionError(ModVillainError, ArithmeticError):
    """A truncation or discretisation cannot meet the requested accuracy.

    ``bound`` carries the error estimate that triggered the failure.
    """

    def __init__(self, message, bound=None):
        super().__init__(message)
        self.bound = bound
