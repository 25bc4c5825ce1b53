class InputError(ValueError):
    """Raised when an argument violates an operation's precondition."""


class CapacityError(InputError):
    """Raised when an exact computation would be too large to enumerate."""


class BudgetError(InputError):
    """Raised when the sampling budget leaves no pairs after learning."""
