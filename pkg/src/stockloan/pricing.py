"""Stock-loan valuation via threshold search over redemption levels.

The client redeems when the loan-to-collateral ratio drops to a level
``u in (0, d)``; the lender liquidates when it reaches ``d``. In log space
each candidate ``u`` turns the contract into a two-barrier problem on
``(h, H(u))`` with ``h = ln(q/d)`` and ``H(u) = ln(q/u)``, discounted at
``alpha = r - gamma``, with the call payoff collected at the exit. The client
value is the best candidate over a uniform grid ``u_j = j d/(N+1)``, with an
optional golden-section pass between the best grid point's neighbours
(the candidate value is continuous in ``u``, so refinement is sound).

Two regimes never touch the transform machinery: without jumps (or without
down-jumps) the loan is riskless and worth exactly the immediate-exercise
payoff everywhere, and at or below the liquidation boundary the contract is
settled on the spot.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

from .errors import FinitenessViolation, NoBracket, NotFound, ValidationError
from .model import JumpParams, LevyModel, MarketParams, check_finiteness
from .passage import BarrierProblem, build_system, solve_linear
from .payoff import call_payoff_vector
from .roots import RootSet, solve_roots

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
#: Refinement stops once the bracket on u is below d times this.
_REFINE_REL = 1e-6
_RATE_TOL = 1e-6
_LENDER_SLACK = 1e-6


@dataclass(frozen=True)
class ValuationResult:
    """Client value plus search diagnostics.

    ``u_star`` is the best redemption threshold, or ``None`` when immediate
    exercise (or liquidation) beats every threshold strategy. ``clamp``
    records the magnitude of any negative-roundoff clamping applied to
    transform values; ``condition_worst`` the worst pivot-ratio estimate seen
    across the grid (``None`` when the transform was never evaluated).
    """

    v: float
    u_star: float | None
    grid_n: int
    refined: bool
    condition_worst: float | None
    clamp: float = 0.0


class _ThresholdEvaluator:
    """Value of one redemption threshold, reusing a single root set.

    The roots depend only on (model, alpha), not on the barriers, so they are
    solved once per valuation and shared across every grid point.
    """

    def __init__(self, model: LevyModel, x: float, roots: RootSet):
        self.model = model
        self.x = x
        self.roots = roots
        self.h = math.log(model.market.q / model.market.d)
        self.intrinsic = max(math.exp(x) - model.market.q, 0.0)
        self.condition_worst = 0.0
        self.clamp = 0.0

    def value(self, u: float) -> float:
        q = self.model.market.q
        upper = math.log(q / u)
        if self.x >= upper:
            # The start sits at or beyond the redemption barrier: redeem now.
            return self.intrinsic
        problem = BarrierProblem(h=self.h, H=upper, x=self.x, alpha=self.roots.alpha)
        fvec = call_payoff_vector(q, self.h, upper, self.model.jumps)
        mat, varpi = build_system(problem, self.roots)
        sol = solve_linear(mat, fvec.as_array())
        self.condition_worst = max(self.condition_worst, sol.condition)
        val = float(varpi @ sol.w)
        if val < 0.0:
            # The payoff is nonnegative, so any negative value is roundoff.
            self.clamp = max(self.clamp, -val)
            val = 0.0
        return val


def _golden_max(fun, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Golden-section maximization returning the best point evaluated."""
    c = hi - _GOLDEN * (hi - lo)
    d = lo + _GOLDEN * (hi - lo)
    fc = fun(c)
    fd = fun(d)
    best_u, best_v = (c, fc) if fc >= fd else (d, fd)
    while hi - lo > tol:
        if fc >= fd:
            hi, d, fd = d, c, fc
            c = hi - _GOLDEN * (hi - lo)
            fc = fun(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + _GOLDEN * (hi - lo)
            fd = fun(d)
        if fc > best_v:
            best_u, best_v = c, fc
        if fd > best_v:
            best_u, best_v = d, fd
    return best_u, best_v


def value_client(model: LevyModel, x: float, grid_n: int = 999, refine: bool = True) -> ValuationResult:
    """Client contract value at log-collateral ``x``.

    ``grid_n`` is the number of uniform threshold candidates; ``refine`` adds
    a golden-section pass localizing the best threshold to ``d * 1e-6``.
    Raises ``FinitenessViolation`` when discounted payoffs are not integrable
    and ``NoRealRoots``/``DegenerateRoots``/``SingularMatrix`` on numerical
    breakdowns of the transform.
    """
    x = float(x)
    if grid_n < 1:
        raise ValidationError(f"grid_n must be >= 1, got {grid_n}")
    violation = check_finiteness(model)
    if violation is not None:
        raise FinitenessViolation(violation)
    mkt = model.market
    intrinsic = max(math.exp(x) - mkt.q, 0.0)

    if model.jumps.lam == 0.0 or model.jumps.n == 0:
        # No down-jumps: liquidation always happens exactly at the boundary,
        # so the loan is riskless and carries no premium anywhere.
        return ValuationResult(v=intrinsic, u_star=None, grid_n=grid_n, refined=False, condition_worst=None)

    h = math.log(mkt.q / mkt.d)
    if x <= h:
        # At or below the liquidation boundary the contract settles on the spot.
        return ValuationResult(v=intrinsic, u_star=None, grid_n=grid_n, refined=False, condition_worst=None)

    roots = solve_roots(model, mkt.r - mkt.gamma)
    ev = _ThresholdEvaluator(model, x, roots)

    du = mkt.d / (grid_n + 1)
    best_val = intrinsic
    best_j = None
    for j in range(1, grid_n + 1):
        val = ev.value(j * du)
        if val > best_val:
            best_val = val
            best_j = j

    u_star: float | None = None
    refined = False
    if best_j is not None:
        u_star = best_j * du
        if refine:
            lo = (best_j - 1) * du if best_j > 1 else du * 1e-3
            hi = min((best_j + 1) * du, mkt.d * (1.0 - 1e-12))
            u_ref, v_ref = _golden_max(ev.value, lo, hi, mkt.d * _REFINE_REL)
            if v_ref > best_val:
                best_val = v_ref
                u_star = u_ref
            refined = True

    return ValuationResult(
        v=best_val,
        u_star=u_star,
        grid_n=grid_n,
        refined=refined,
        condition_worst=ev.condition_worst if ev.condition_worst > 0.0 else None,
        clamp=ev.clamp,
    )


def value_lender(model: LevyModel, x: float, grid_n: int = 999, refine: bool = True) -> float:
    """Lender-side contract value: the collateral splits as e^x = client + lender."""
    return math.exp(float(x)) - value_client(model, x, grid_n=grid_n, refine=refine).v


def rational_premium(model: LevyModel, x: float, grid_n: int = 999, refine: bool = True) -> float:
    """Up-front premium making the loan arbitrage-free at the model's loan rate.

    Equals client value minus the net amount exchanged at inception,
    ``c = v - (e^x - q)``; clamped at zero against roundoff.
    """
    c = value_client(model, x, grid_n=grid_n, refine=refine).v - (math.exp(float(x)) - model.market.q)
    return max(c, 0.0)


def rational_rate(
    market: MarketParams,
    jumps: JumpParams,
    x: float,
    c: float,
    grid_n: int = 999,
    refine: bool = True,
    gamma_hi: float = 1.0,
) -> float:
    """Loan rate whose rational premium matches the target ``c``.

    ``market.gamma`` is ignored; the rate is bisected on ``[r, gamma_hi]`` to
    an absolute tolerance of 1e-6. The premium falls as the rate rises (a
    dearer loan carries a cheaper option); a non-monotone sample across the
    bracket only triggers a warning, since bisection needs no more than the
    crossing. Raises ``NoBracket`` when the premium never reaches the target
    on the interval. A zero target is met on a whole band of rates once the
    contract is exercised immediately; the first such rate is returned rather
    than inventing a canonical one inside the band.
    """
    c = float(c)
    if c < 0.0:
        raise ValidationError(f"target premium must be nonnegative, got {c}")
    if gamma_hi <= market.r:
        raise ValidationError(f"gamma_hi={gamma_hi} must exceed r={market.r}")

    def premium_at(gamma: float) -> float:
        model = LevyModel(replace(market, gamma=gamma), jumps)
        try:
            return rational_premium(model, x, grid_n=grid_n, refine=refine)
        except FinitenessViolation as exc:
            raise FinitenessViolation(f"at gamma={gamma}: {exc}") from exc

    lo, hi = market.r, float(gamma_hi)
    g_lo = premium_at(lo) - c
    g_hi = premium_at(hi) - c
    if g_lo == 0.0:
        return lo
    if g_hi != 0.0 and (g_lo < 0.0) == (g_hi < 0.0):
        raise NoBracket(
            f"premium - target has no sign change on [{lo}, {hi}]: "
            f"endpoints {g_lo + c:.6g} and {g_hi + c:.6g} vs target {c:.6g}"
        )
    g_mid = premium_at(0.5 * (lo + hi)) - c
    if not min(g_lo, g_hi) - 1e-9 <= g_mid <= max(g_lo, g_hi) + 1e-9:
        warnings.warn(
            f"premium is not monotone across [{lo}, {hi}] (midpoint {g_mid + c:.6g}); "
            "returning the bracketed crossing anyway",
            stacklevel=2,
        )

    # Bisect the earliest rate where the gap reaches zero. Treating an exact
    # zero as "crossed" also resolves zero-premium targets, where the gap
    # plateaus at zero past the exercise frontier instead of changing sign.
    while hi - lo > _RATE_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = premium_at(mid) - c
        if g_mid == 0.0 or (g_mid < 0.0) != (g_lo < 0.0):
            hi = mid
        else:
            lo, g_lo = mid, g_mid
    return 0.5 * (lo + hi)


def exercise_threshold_k(
    model: LevyModel,
    grid_n: int = 999,
    refine: bool = True,
    span: float = 10.0,
    probe: float = 1e-3,
) -> float:
    """Smallest log-collateral above the liquidation boundary where the lender
    recovers the full principal (the immediate-exercise frontier).

    Returns the liquidation boundary itself when the frontier is collapsed
    (the lender is already whole just above it, so the contract is valueless
    to both sides). Raises ``NotFound`` when the lender stays short of the
    principal across the whole search interval of width ``span``.
    """
    mkt = model.market
    h = math.log(mkt.q / mkt.d)
    target = mkt.q - _LENDER_SLACK

    def whole(x: float) -> bool:
        return value_lender(model, x, grid_n=grid_n, refine=refine) >= target

    lo = h + probe
    if whole(lo):
        return h
    hi = h + float(span)
    if not whole(hi):
        raise NotFound(
            f"lender value stays below q={mkt.q} on ({h}, {hi}); "
            "widen the search span if the frontier can sit further out"
        )
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if whole(mid):
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
