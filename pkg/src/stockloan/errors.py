"""Exception types shared across the pricing engine."""


class StockLoanError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(StockLoanError, ValueError):
    """A model or contract parameter violates one of the standing assumptions."""


class PoleEvaluation(StockLoanError, ValueError):
    """The Levy exponent was requested within the guard band of one of its poles."""


class NoRealRoots(StockLoanError, ArithmeticError):
    """The discount argument lies below the exponent minimum, so no real roots exist."""


class DegenerateRoots(StockLoanError, ArithmeticError):
    """The two innermost roots coincide; the two-barrier transform matrix is singular there."""


class SingularMatrix(StockLoanError, ArithmeticError):
    """Gaussian elimination met a pivot too small relative to its row scale."""


class DomainError(StockLoanError, ValueError):
    """Closed-form payoff integrals were requested outside their validity region."""


class NonConvergence(StockLoanError, ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance within budget."""


class FinitenessViolation(StockLoanError, ValueError):
    """The discounted-payoff integrability condition fails, so pricing is refused."""


class NoBracket(StockLoanError, ArithmeticError):
    """A scalar solve found no sign change on the search interval."""


class NotFound(StockLoanError, ArithmeticError):
    """A threshold search exhausted its interval without meeting its criterion."""


class TruncationWarning(UserWarning):
    """Monte Carlo path-time truncation may be material relative to the standard error."""


#: Errors that indicate a numerical failure for an otherwise valid input
#: (CLI maps these to exit code 3, parameter validation to exit code 2).
NUMERICAL_ERRORS = (
    NoRealRoots,
    DegenerateRoots,
    SingularMatrix,
    NonConvergence,
    NoBracket,
    NotFound,
)
