"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An operation was called with out-of-contract parameters."""


class BudgetError(RuntimeError):
    """An operation refused to exceed an explicit resource budget.

    The enumeration-style oracles (vector counting, kernel enumeration,
    subset search) and the elimination kernels fail loudly instead of
    consuming unbounded time or memory.  Attributes carry whatever
    partial-progress information the operation can report.
    """

    def __init__(self, message, *, completed_sizes=None, kernel_dim=None):
        super().__init__(message)
        self.completed_sizes = completed_sizes
        self.kernel_dim = kernel_dim
