"""Exception hierarchy.

Every error carries a stable ``code`` string so the CLI and reports can
name the failure without parsing messages.
"""


class WarpstabError(Exception):
    code = "ERROR"


class ValidationError(WarpstabError, ValueError):
    code = "VALIDATION_ERROR"


class ObataViolation(ValidationError):
    code = "OBATA_VIOLATION"


class MuViolation(ValidationError):
    code = "MU_VIOLATION"


class NegativeEigenvalue(ValidationError):
    code = "NEGATIVE_EIGENVALUE"


class UnsupportedCase(ValidationError):
    code = "UNSUPPORTED_CASE"


class SolverError(WarpstabError, ArithmeticError):
    code = "SOLVER_ERROR"


class WeightOverflow(SolverError):
    """A weight evaluated to inf/nan at a quadrature node."""

    code = "OVERFLOW"


class NoConvergence(SolverError):
    code = "NO_CONVERGENCE"


class NotFound(WarpstabError):
    code = "NOT_FOUND"


class BudgetExceeded(SolverError):
    code = "BUDGET_EXCEEDED"

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class InvalidState(WarpstabError):
    code = "INVALID_STATE"


class ResolutionTooCoarse(SolverError):
    code = "RESOLUTION_TOO_COARSE"
