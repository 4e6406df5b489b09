"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes of the inputs are incompatible with the requested operation."""


class BudgetExceededError(RuntimeError):
    """Exhaustive enumeration would exceed the configured subset budget.

    Raised by expander certification when the number of subsets to enumerate
    is too large; switch to sampled mode instead.
    """


class DegenerateInputError(ValueError):
    """An iterate or input collapsed to a degenerate state (e.g. zero vector)."""
