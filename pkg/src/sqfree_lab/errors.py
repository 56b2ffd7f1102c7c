"""Exception types shared across the laboratory."""


class BudgetError(RuntimeError):
    """A requested range or table exceeds the configured memory/time budget."""


class PrecisionError(ArithmeticError):
    """The stored precision of an irrational is too small for the request."""
