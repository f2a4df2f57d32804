"""Stock-loan pricing under a hyper-exponential jump-diffusion with liquidation."""

from .errors import (
    DegenerateRoots,
    DomainError,
    FinitenessViolation,
    NoBracket,
    NonConvergence,
    NoRealRoots,
    NotFound,
    PoleEvaluation,
    SingularMatrix,
    StockLoanError,
    TruncationWarning,
    ValidationError,
)
from .mc import McConfig, McResult, sample_jump, sample_jumps, simulate_exit_expectation
from .model import (
    JumpParams,
    LevyModel,
    MarketParams,
    check_finiteness,
    drifted_exponent,
    exponent_derivative,
    exponent_minimum,
    jump_mean_zeta,
    levy_exponent,
)
from .passage import (
    BarrierProblem,
    LinearSolution,
    PayoffVector,
    build_system,
    expected_discounted_payoff,
    solve_linear,
)
from .payoff import call_payoff_vector, quadrature_payoff_vector
from .pricing import (
    ValuationResult,
    exercise_threshold_k,
    rational_premium,
    rational_rate,
    value_client,
    value_lender,
)
from .roots import RootSet, solve_roots

__version__ = "0.1.0"

__all__ = [
    "BarrierProblem",
    "DegenerateRoots",
    "DomainError",
    "FinitenessViolation",
    "JumpParams",
    "LevyModel",
    "LinearSolution",
    "MarketParams",
    "McConfig",
    "McResult",
    "NoBracket",
    "NonConvergence",
    "NoRealRoots",
    "NotFound",
    "PayoffVector",
    "PoleEvaluation",
    "RootSet",
    "SingularMatrix",
    "StockLoanError",
    "TruncationWarning",
    "ValidationError",
    "ValuationResult",
    "build_system",
    "call_payoff_vector",
    "check_finiteness",
    "drifted_exponent",
    "exercise_threshold_k",
    "expected_discounted_payoff",
    "exponent_derivative",
    "exponent_minimum",
    "jump_mean_zeta",
    "levy_exponent",
    "quadrature_payoff_vector",
    "rational_premium",
    "rational_rate",
    "sample_jump",
    "sample_jumps",
    "simulate_exit_expectation",
    "solve_linear",
    "solve_roots",
    "value_client",
    "value_lender",
]
