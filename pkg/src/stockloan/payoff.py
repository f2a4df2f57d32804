"""Payoff vectors for the two-barrier transform.

The contract only ever needs the call payoff ``(e^x - q)^+`` with the lower
barrier at or above the kink, for which every overshoot integral has a short
closed form. The quadrature builder exists as an independent cross-check of
those closed forms (it integrates the defining expressions directly) and is
not meant as a public payoff API.
"""

from __future__ import annotations

import math
from typing import Callable

from scipy.integrate import quad

from .errors import DomainError, NonConvergence, ValidationError
from .model import JumpParams
from .passage import PayoffVector

_QUAD_TOL = 1e-12
_ABSERR_REL = 1e-8
#: Down-side integrals are cut where the exponential weight is below 1e-16.
_LOG_NEGLIGIBLE = 40.0


def call_payoff_vector(q: float, h: float, H: float, jumps: JumpParams) -> PayoffVector:
    """Closed-form payoff vector for ``f(x) = (e^x - q)^+`` with ``ln q <= h < H``.

    Entries::

        f_u[0] = e^H - q
        f_u[i] = e^H/(eta_i - 1) - q/eta_i
        f_d[0] = e^h - q
        f_d[j] = q^(1+theta_j) e^(-h theta_j) / (theta_j (1+theta_j))
                 + e^h/(1+theta_j) - q/theta_j

    Below the kink (``h < ln q``) these forms are invalid and a DomainError
    is raised. The power term is evaluated in log space so large down-jump
    rates cannot overflow.
    """
    q = float(q)
    h = float(h)
    H = float(H)
    if q <= 0.0:
        raise ValidationError(f"principal must satisfy q > 0, got {q}")
    if not h < H:
        raise ValidationError(f"barriers must satisfy h < H, got h={h}, H={H}")
    ln_q = math.log(q)
    if h < ln_q - 1e-12 * (1.0 + abs(ln_q)):
        raise DomainError(
            f"closed forms require ln q <= h (lower barrier above the payoff kink); "
            f"got h={h} < ln q={ln_q}"
        )
    if jumps.m > 0 and jumps.eta[0] <= 1.0:
        raise ValidationError(f"up-side integrals need eta[0] > 1, got {jumps.eta[0]}")

    e_h = math.exp(h)
    e_H = math.exp(H)
    f_u = [e_H - q]
    f_u += [e_H / (e - 1.0) - q / e for e in jumps.eta]
    f_d = [e_h - q]
    f_d += [
        math.exp(ln_q + t * (ln_q - h)) / (t * (1.0 + t)) + e_h / (1.0 + t) - q / t
        for t in jumps.theta
    ]
    return PayoffVector(f_u=tuple(f_u), f_d=tuple(f_d))


def _piecewise_quad(g: Callable[[float], float], points: list[float]) -> tuple[float, float]:
    total = 0.0
    err = 0.0
    for a, b in zip(points, points[1:]):
        val, abserr = quad(g, a, b, epsabs=_QUAD_TOL, epsrel=_QUAD_TOL, limit=200)
        total += val
        err += abserr
    return total, err


def quadrature_payoff_vector(
    payoff: Callable[[float], float],
    kink: float | None,
    h: float,
    H: float,
    jumps: JumpParams,
) -> PayoffVector:
    """Payoff vector via adaptive quadrature of the defining integrals.

    ``payoff`` must be nonnegative and measurable, growing at most like the
    collateral ``e^x`` upward (the call does) and bounded below the lower
    barrier. A kink location (if any) is passed through as a quadrature split
    point, since the integrand is only piecewise smooth there. Raises
    ``NonConvergence`` when the reported quadrature error is not negligible
    next to the result.
    """
    h = float(h)
    H = float(H)
    if not h < H:
        raise ValidationError(f"barriers must satisfy h < H, got h={h}, H={H}")

    f_u = [float(payoff(H))]
    err_budget = 0.0
    for e in jumps.eta:
        # Integrand payoff(y+H) e^{-e y} on (0, inf); split once at the kink.
        # For payoffs growing at most like the collateral e^x (the call does,
        # and e > 1 is guaranteed), the weighted tail decays at rate e - 1,
        # so cutting where that tail is machine-negligible is exact in doubles
        # and keeps the raw payoff clear of floating-point overflow.
        g = lambda y, rate=e: payoff(y + H) * math.exp(-rate * y)
        points = [0.0]
        if kink is not None and 0.0 < kink - H:
            points.append(kink - H)
        points.append(points[-1] + _LOG_NEGLIGIBLE / (e - 1.0))
        val, err = _piecewise_quad(g, points)
        f_u.append(val)
        err_budget = max(err_budget, err)

    f_d = [float(payoff(h))]
    for t in jumps.theta:
        y_lo = -_LOG_NEGLIGIBLE / t
        points = [y_lo]
        if kink is not None and y_lo < kink - h < 0.0:
            points.append(kink - h)
        points.append(0.0)
        val, err = _piecewise_quad(lambda y, rate=t: payoff(y + h) * math.exp(rate * y), points)
        f_d.append(val)
        err_budget = max(err_budget, err)

    vec = PayoffVector(f_u=tuple(f_u), f_d=tuple(f_d))
    scale = 1.0 + max(abs(v) for v in vec.f_u + vec.f_d)
    if err_budget > _ABSERR_REL * scale:
        raise NonConvergence(
            f"quadrature error estimate {err_budget!r} exceeds {_ABSERR_REL} of scale {scale!r}"
        )
    return vec
