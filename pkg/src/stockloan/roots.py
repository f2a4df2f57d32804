"""Real roots of the drift-adjusted Levy exponent shifted by a discount rate.

For a discount argument ``alpha`` at or above the exponent minimum, the
equation ``drifted_exponent(x) = alpha`` has exactly ``m + n + 2`` real
solutions, interlaced with the poles of the rational exponent:

    -gamma_mag[n] < -theta[n-1] < ... < -theta[0] < -gamma_mag[0]
        <= beta[0] < eta[0] < beta[1] < ... < eta[m-1] < beta[m]

Each bracket below carries a guaranteed sign change (convexity between the
innermost poles, blow-up at every pole, the quadratic term far out), which is
why plain bisection is used: it cannot be thrown off by the huge derivatives
next to the poles.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .errors import DegenerateRoots, NoRealRoots, ValidationError
from .model import POLE_GUARD, LevyModel, drifted_exponent, exponent_minimum

_RESIDUAL_REL = 1e-10
_DISTINCT_TOL = 1e-8
_MAX_DOUBLINGS = 60
_MAX_BISECT = 200


@dataclass(frozen=True)
class RootSet:
    """Roots of ``drifted_exponent(x) = alpha`` labelled by side.

    ``beta`` holds the ``m + 1`` roots interlacing the up-jump rates
    (ascending). The remaining ``n + 1`` roots are ``-gamma_mag[j]`` with
    ``gamma_mag`` ascending. The name keeps these root labels apart from the
    loan rate gamma, which is unrelated. Note ``gamma_mag[0]`` can be
    negative: for ``alpha < 0`` the innermost left root may sit just right of
    the origin.

    ``eta`` and ``theta`` are copied from the jump mixture so the set carries
    its own interlacing frame (and the pole data the transform matrix needs).
    """

    alpha: float
    beta: tuple[float, ...]
    gamma_mag: tuple[float, ...]
    eta: tuple[float, ...]
    theta: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "beta", tuple(float(v) for v in self.beta))
        object.__setattr__(self, "gamma_mag", tuple(float(v) for v in self.gamma_mag))
        object.__setattr__(self, "eta", tuple(float(v) for v in self.eta))
        object.__setattr__(self, "theta", tuple(float(v) for v in self.theta))

    @property
    def m(self) -> int:
        return len(self.beta) - 1

    @property
    def n(self) -> int:
        return len(self.gamma_mag) - 1

    def interlacing_ok(self) -> bool:
        """Strict interlacing of roots and poles (distinct innermost pair)."""
        seq: list[float] = []
        for g, t in zip(reversed(self.gamma_mag[1:]), reversed(self.theta)):
            seq.extend((-g, -t))
        seq.append(-self.gamma_mag[0])
        seq.append(self.beta[0])
        for b, e in zip(self.beta[1:], self.eta):
            seq.extend((e, b))
        return all(a < b for a, b in zip(seq, seq[1:]))


def _bisect(f: Callable[[float], float], a: float, b: float) -> float:
    """Bisection on a bracket with f(a)*f(b) <= 0, run down to float spacing."""
    fa = f(a)
    if fa == 0.0:
        return a
    fb = f(b)
    if fb == 0.0:
        return b
    if (fa < 0.0) == (fb < 0.0):
        raise ValidationError(
            f"lost root bracket on [{a!r}, {b!r}]: f(a)={fa!r}, f(b)={fb!r} "
            "(a root sits inside a pole guard band; vanishing mixture weights can cause this)"
        )
    for _ in range(_MAX_BISECT):
        mid = 0.5 * (a + b)
        if not a < mid < b:
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm < 0.0) == (fa < 0.0):
            a, fa = mid, fm
        else:
            b, fb = mid, fm
    return a if abs(fa) <= abs(fb) else b


def _edge(pole: float, side: int) -> float:
    """Point just inside an interval whose endpoint is a pole.

    Stays at twice the evaluation guard, where the pole term already dwarfs
    everything else, so the bracket sign is certain there.
    """
    return pole + side * 2.0 * POLE_GUARD * (1.0 + abs(pole))


def _expand(f: Callable[[float], float], start: float, direction: int) -> float:
    """March outward from ``start`` by doubling steps until f > 0.

    Far enough out the quadratic term dominates, so this terminates for any
    valid model; hitting the cap means the inputs are inconsistent.
    """
    step = 1.0
    for _ in range(_MAX_DOUBLINGS):
        x = start + direction * step
        if f(x) > 0.0:
            return x
        step *= 2.0
    raise ValidationError(
        f"no sign change within {start + direction * step} while expanding the outer root bracket"
    )


def solve_roots(model: LevyModel, alpha: float) -> RootSet:
    """All ``m + n + 2`` real solutions of ``drifted_exponent(x) = alpha``.

    Raises ``NoRealRoots`` when ``alpha`` is below the exponent minimum and
    ``DegenerateRoots`` when the two innermost roots coincide (to within
    1e-8); the transform matrix is singular in that confluent case, and since
    alpha is pinned by the contract rates it must not be nudged silently.
    """
    alpha = float(alpha)
    jumps = model.jumps
    if jumps.lam <= 0.0:
        raise ValidationError(
            "root solving requires a positive jump intensity; the no-jump case "
            "prices in closed form and never reaches the transform"
        )
    x_star, m_min = exponent_minimum(model, drifted=True)
    if alpha < m_min:
        raise NoRealRoots(
            f"alpha={alpha} is below the drift-adjusted exponent minimum {m_min}; "
            "no real roots exist (the parameter set sits past the boundary alpha = M)"
        )

    def f(x: float) -> float:
        return drifted_exponent(model, x) - alpha

    eta, theta = jumps.eta, jumps.theta
    m, n = jumps.m, jumps.n

    beta: list[float] = []
    if m > 0:
        beta.append(_bisect(f, x_star, _edge(eta[0], -1)))
        for i in range(m - 1):
            beta.append(_bisect(f, _edge(eta[i], +1), _edge(eta[i + 1], -1)))
        start = _edge(eta[m - 1], +1)
        beta.append(_bisect(f, start, _expand(f, eta[m - 1], +1)))
    else:
        beta.append(_bisect(f, x_star, _expand(f, x_star, +1)))

    neg_roots: list[float] = []  # found moving leftward from the minimum
    if n > 0:
        neg_roots.append(_bisect(f, _edge(-theta[0], +1), x_star))
        for j in range(n - 1):
            neg_roots.append(_bisect(f, _edge(-theta[j + 1], +1), _edge(-theta[j], -1)))
        start = _edge(-theta[n - 1], -1)
        neg_roots.append(_bisect(f, _expand(f, -theta[n - 1], -1), start))
    else:
        neg_roots.append(_bisect(f, _expand(f, x_star, -1), x_star))

    gamma_mag = tuple(-r for r in neg_roots)
    roots = RootSet(alpha=alpha, beta=tuple(beta), gamma_mag=gamma_mag, eta=eta, theta=theta)

    if roots.beta[0] - (-roots.gamma_mag[0]) < _DISTINCT_TOL:
        raise DegenerateRoots(
            f"innermost roots coincide (beta[0]={roots.beta[0]!r}, "
            f"-gamma_mag[0]={-roots.gamma_mag[0]!r}): the parameter set sits on the "
            f"boundary alpha = M (alpha={alpha}, M={m_min}); the transform is undefined there"
        )
    if not roots.interlacing_ok():  # pragma: no cover - theory guarantees this
        raise ValidationError(f"root interlacing check failed: {roots}")
    tol = _RESIDUAL_REL * (1.0 + abs(alpha))
    for root in roots.beta + tuple(-g for g in roots.gamma_mag):
        res = abs(f(root))
        if res > tol:  # pragma: no cover - brackets are sign-certain
            raise ValidationError(f"root residual {res!r} at x={root!r} exceeds {tol!r}")
    return roots
