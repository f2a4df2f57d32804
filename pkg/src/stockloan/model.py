"""Hyper-exponential jump-diffusion model: parameters and the Levy exponent.

The log-collateral follows a Brownian motion with drift plus a compound
Poisson process whose jump sizes are a two-sided mixture of exponentials.
Everything downstream (root solving, the two-barrier transform, pricing)
is driven by the exponent defined here and by its drift-adjusted variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import PoleEvaluation, ValidationError

#: Relative half-width of the band around each pole inside which the rational
#: form of the exponent refuses to evaluate.
POLE_GUARD = 1e-10

#: Guard offset used when an open interval endpoint sits on a pole.
_EDGE_OFFSET = 1e-9

_WEIGHT_TOL = 1e-12
_MAX_DOUBLINGS = 60


@dataclass(frozen=True)
class MarketParams:
    """Contract and market scalars for a stock loan.

    Rates are continuously compounded per year. ``q`` is the loan principal,
    ``d`` the loan-to-collateral ratio at which the lender forces repayment.
    """

    r: float
    delta: float
    sigma: float
    gamma: float
    q: float
    d: float

    def __post_init__(self) -> None:
        for name in ("r", "delta", "sigma", "gamma", "q", "d"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not 0.0 < self.d <= 1.0:
            raise ValidationError(f"liquidation ratio must satisfy 0 < d <= 1, got d={self.d}")
        if self.delta < 0.0:
            raise ValidationError(f"dividend rate must satisfy delta >= 0, got delta={self.delta}")
        if not self.gamma >= self.r >= 0.0:
            raise ValidationError(
                f"rates must satisfy gamma >= r >= 0, got gamma={self.gamma}, r={self.r}"
            )
        if self.sigma <= 0.0:
            # The root interlacing and the a.s.-finite two-barrier exit both
            # need a diffusive part; pure-jump dynamics are rejected outright.
            raise ValidationError(f"volatility must satisfy sigma > 0, got sigma={self.sigma}")
        if self.q <= 0.0:
            raise ValidationError(f"principal must satisfy q > 0, got q={self.q}")


@dataclass(frozen=True)
class JumpParams:
    """Jump intensity and the two-sided exponential mixture of jump sizes.

    Up-jumps have weights ``p[i]`` and rates ``eta[i]`` (strictly ascending,
    ``eta[0] > 1`` so the collateral keeps a finite mean); down-jumps have
    weights ``qw[j]`` and rates ``theta[j]`` (strictly ascending, positive).
    Weights across both sides sum to one. ``lam`` may be zero, in which case
    the mixture is never sampled but must still be well formed.
    """

    lam: float
    p: tuple[float, ...]
    eta: tuple[float, ...]
    qw: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "lam", float(self.lam))
        for name in ("p", "eta", "qw", "theta"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if self.lam < 0.0:
            raise ValidationError(f"jump intensity must satisfy lambda >= 0, got {self.lam}")
        if len(self.p) != len(self.eta):
            raise ValidationError("p and eta must have equal length")
        if len(self.qw) != len(self.theta):
            raise ValidationError("qw and theta must have equal length")
        if self.m + self.n < 1:
            raise ValidationError("the mixture needs at least one component (m + n >= 1)")
        if any(w <= 0.0 for w in self.p) or any(w <= 0.0 for w in self.qw):
            raise ValidationError("all mixture weights must be positive")
        total = math.fsum(self.p) + math.fsum(self.qw)
        if abs(total - 1.0) > _WEIGHT_TOL:
            raise ValidationError(f"mixture weights must sum to 1 within {_WEIGHT_TOL}, got {total!r}")
        if self.m > 0:
            if self.eta[0] <= 1.0:
                raise ValidationError(f"up-jump rates must satisfy eta[0] > 1, got eta[0]={self.eta[0]}")
            if any(a >= b for a, b in zip(self.eta, self.eta[1:])):
                raise ValidationError("up-jump rates eta must be strictly increasing")
        if self.n > 0:
            if self.theta[0] <= 0.0:
                raise ValidationError(f"down-jump rates must satisfy theta[0] > 0, got theta[0]={self.theta[0]}")
            if any(a >= b for a, b in zip(self.theta, self.theta[1:])):
                raise ValidationError("down-jump rates theta must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.p)

    @property
    def n(self) -> int:
        return len(self.qw)


def jump_mean_zeta(jumps: JumpParams) -> float:
    """Mean relative jump size of the collateral, E[e^Y] - 1."""
    up = math.fsum(pi * ei / (ei - 1.0) for pi, ei in zip(jumps.p, jumps.eta))
    down = math.fsum(wj * tj / (tj + 1.0) for wj, tj in zip(jumps.qw, jumps.theta))
    return up + down - 1.0


@dataclass(frozen=True)
class LevyModel:
    """Market and jump parameters plus the derived drift and jump mean.

    ``zeta`` is the mean relative jump size and ``mu`` the risk-neutral drift
    of the log-collateral. Both are computed once at construction; instances
    are immutable, so the cached values cannot go stale and the model is safe
    to share across workers.
    """

    market: MarketParams
    jumps: JumpParams
    mu: float = field(init=False)
    zeta: float = field(init=False)

    def __post_init__(self) -> None:
        zeta = jump_mean_zeta(self.jumps)
        mu = self.market.r - self.market.delta - 0.5 * self.market.sigma**2 - self.jumps.lam * zeta
        object.__setattr__(self, "zeta", zeta)
        object.__setattr__(self, "mu", mu)


def _check_pole(jumps: JumpParams, x: float) -> None:
    if jumps.lam == 0.0:
        return
    for e in jumps.eta:
        if abs(x - e) < POLE_GUARD * (1.0 + abs(e)):
            raise PoleEvaluation(f"x={x!r} is within the guard band of the pole at {e}")
    for t in jumps.theta:
        if abs(x + t) < POLE_GUARD * (1.0 + abs(t)):
            raise PoleEvaluation(f"x={x!r} is within the guard band of the pole at {-t}")


def levy_exponent(model: LevyModel, x: float) -> float:
    """Levy exponent G with E[e^{x X_t}] = e^{G(x) t}.

    The rational-function form is evaluated on the whole real line minus the
    poles at ``eta[i]`` and ``-theta[j]`` (the outer roots needed by the
    transform live beyond the innermost poles, so the analytic continuation
    is the working definition here).
    """
    _check_pole(model.jumps, x)
    mkt, jumps = model.market, model.jumps
    val = 0.5 * mkt.sigma**2 * x * x + model.mu * x
    if jumps.lam > 0.0:
        mix = math.fsum(pi * ei / (ei - x) for pi, ei in zip(jumps.p, jumps.eta))
        mix += math.fsum(wj * tj / (tj + x) for wj, tj in zip(jumps.qw, jumps.theta))
        val += jumps.lam * (mix - 1.0)
    return val


def drifted_exponent(model: LevyModel, x: float) -> float:
    """Exponent of the loan-rate-adjusted log-collateral: G(x) - gamma*x."""
    return levy_exponent(model, x) - model.market.gamma * x


def exponent_derivative(model: LevyModel, x: float, drifted: bool = False) -> float:
    """Analytic first derivative of the (optionally drift-adjusted) exponent."""
    _check_pole(model.jumps, x)
    mkt, jumps = model.market, model.jumps
    val = mkt.sigma**2 * x + model.mu
    if jumps.lam > 0.0:
        mix = math.fsum(pi * ei / (ei - x) ** 2 for pi, ei in zip(jumps.p, jumps.eta))
        mix -= math.fsum(wj * tj / (tj + x) ** 2 for wj, tj in zip(jumps.qw, jumps.theta))
        val += jumps.lam * mix
    if drifted:
        val -= mkt.gamma
    return val


def exponent_minimum(model: LevyModel, drifted: bool = False) -> tuple[float, float]:
    """Minimize the exponent between the innermost poles.

    Returns ``(x_star, M)``. The exponent is convex on that interval and
    vanishes at the origin, so ``M <= 0`` always. Open endpoints are stood in
    for by small guard offsets; when one side has no pole the quadratic term
    guarantees the dip turns around, and the search interval is grown by
    doubling until the derivative changes sign.
    """
    jumps, mkt = model.jumps, model.market

    def g(x: float) -> float:
        return drifted_exponent(model, x) if drifted else levy_exponent(model, x)

    def gp(x: float) -> float:
        return exponent_derivative(model, x, drifted=drifted)

    left = None
    right = None
    if jumps.n > 0:
        left = -jumps.theta[0] + _EDGE_OFFSET * (1.0 + jumps.theta[0])
    if jumps.m > 0:
        right = jumps.eta[0] - _EDGE_OFFSET * (1.0 + jumps.eta[0])

    if jumps.lam == 0.0:
        # Pure quadratic: clamp the vertex into the guarded interval.
        mu_eff = model.mu - (mkt.gamma if drifted else 0.0)
        x_star = -mu_eff / mkt.sigma**2
        if left is not None and x_star < left:
            x_star = left
        if right is not None and x_star > right:
            x_star = right
        return x_star, g(x_star)

    if left is None:
        left = min(-1.0, (right if right is not None else 0.0) - 1.0)
        for _ in range(_MAX_DOUBLINGS):
            if gp(left) < 0.0:
                break
            left *= 2.0
        else:  # pragma: no cover - sigma > 0 makes the quadratic term win
            raise ValidationError("could not bracket the exponent minimum on the left")
    if right is None:
        right = max(1.0, left + 1.0)
        for _ in range(_MAX_DOUBLINGS):
            if gp(right) > 0.0:
                break
            right *= 2.0
        else:  # pragma: no cover
            raise ValidationError("could not bracket the exponent minimum on the right")

    flo = gp(left)
    fhi = gp(right)
    if flo >= 0.0:
        return left, g(left)
    if fhi <= 0.0:
        return right, g(right)

    a, b = left, right
    for _ in range(200):
        mid = 0.5 * (a + b)
        if not a < mid < b or b - a <= 1e-13 * (1.0 + abs(mid)):
            break
        if gp(mid) < 0.0:
            a = mid
        else:
            b = mid
    x_star = 0.5 * (a + b)
    return x_star, g(x_star)


def check_finiteness(model: LevyModel) -> str | None:
    """None when discounted payoffs are integrable, else a description.

    Integrability holds with positive dividends, or with zero dividends when
    the drift-adjusted exponent slopes downward at one. Returning the
    violation (instead of raising) lets callers report why pricing is refused.
    """
    if model.market.delta > 0.0:
        return None
    slope = exponent_derivative(model, 1.0, drifted=True)
    if slope < 0.0:
        return None
    return (
        "finiteness requires delta > 0, or delta = 0 with a negative slope of the "
        f"drift-adjusted exponent at 1; got delta=0 and slope {slope:.6g}"
    )
