"""Exception hierarchy.

Every error carries a short machine-readable ``category`` string; the CLI
prints it verbatim.
"""


class FactorForgeError(Exception):
    category = "error"


class InvalidInputError(FactorForgeError, ValueError):
    """Input data violates a numeric precondition (non-finite, asymmetric...)."""

    category = "invalid-input"


class InvalidArgumentError(FactorForgeError, ValueError):
    """Argument out of range or dimensions that do not line up."""

    category = "invalid-argument"


class RankDeficiencyError(FactorForgeError, ArithmeticError):
    category = "rank-deficiency"


class ConvergenceError(FactorForgeError, ArithmeticError):
    category = "no-convergence"


class FormatError(FactorForgeError, ValueError):
    """File contents do not match the expected binary or JSON layout."""

    category = "format"


class StorageError(FactorForgeError, OSError):
    category = "io"


class EmptyCategoryError(FactorForgeError, LookupError):
    category = "empty-category"


class EmptyDataError(FactorForgeError, ValueError):
    category = "empty-data"


class BudgetExhaustedError(FactorForgeError, RuntimeError):
    """Rejection sampling ran out of draws before every quota was met."""

    category = "budget-exhausted"

    def __init__(self, message, unfilled=(), draws=0, filled=None):
        super().__init__(message)
        self.unfilled = tuple(unfilled)
        self.draws = draws
        # category name -> draws consumed when its quota was met
        self.filled = dict(filled or {})
