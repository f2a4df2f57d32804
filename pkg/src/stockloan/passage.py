"""Closed-form expectation at the first exit from a two-barrier corridor.

For the drift-adjusted log-collateral started at ``x`` inside ``(h, H)`` and
stopped at the first exit time ``tau``, the discounted expectation
``E[e^{-alpha tau} f(X_tau)]`` equals ``varpi(x) @ solve(N, fvec)`` where

* ``N`` is an ``(m+n+2) x (m+n+2)`` matrix built from the roots and the jump
  rates (layout in :func:`build_system`),
* ``varpi(x)`` is a row of exponentials anchored at the two barriers,
* ``fvec`` collects the payoff at each barrier together with its
  exponentially weighted overshoot integrals beyond them.

The matrices stay tiny (a handful of mixture components), so the linear
solve is an in-place Gaussian elimination with partial pivoting that also
reports a pivot-ratio condition estimate; ill-conditioning shows up when the
two innermost roots drift together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularMatrix, ValidationError
from .roots import RootSet

_PIVOT_REL = 1e-13


@dataclass(frozen=True)
class BarrierProblem:
    """Two flat log-barriers, a start point strictly between them, a discount."""

    h: float
    H: float
    x: float
    alpha: float

    def __post_init__(self) -> None:
        for name in ("h", "H", "x", "alpha"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not self.h < self.H:
            raise ValidationError(f"barriers must satisfy h < H, got h={self.h}, H={self.H}")
        if not self.h < self.x < self.H:
            raise ValidationError(
                f"start must lie strictly between the barriers, got x={self.x} for ({self.h}, {self.H})"
            )


@dataclass(frozen=True)
class PayoffVector:
    """Barrier values and overshoot integrals of a payoff.

    ``f_u[0]`` is the payoff at the upper barrier and ``f_u[i]`` the integral
    of the payoff above it against ``e^{-eta[i-1] y}``; ``f_d`` mirrors this
    below the lower barrier with weights ``e^{theta[j-1] y}``.
    """

    f_u: tuple[float, ...]
    f_d: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "f_u", tuple(float(v) for v in self.f_u))
        object.__setattr__(self, "f_d", tuple(float(v) for v in self.f_d))
        if not all(math.isfinite(v) for v in self.f_u + self.f_d):
            raise ValidationError(f"payoff vector entries must be finite, got {self}")

    def as_array(self) -> np.ndarray:
        return np.array(self.f_u + self.f_d, dtype=float)


def build_system(problem: BarrierProblem, roots: RootSet) -> tuple[np.ndarray, np.ndarray]:
    """Transform matrix ``N`` and weight row ``varpi(x)`` for one corridor.

    With ``s = m + n + 2``, ``xbar = e^{h-H}``, roots ``beta[k]`` and
    ``-gamma_mag[j]``, the rows of ``N`` are:

    * row 0: ``1`` per beta column, ``xbar**gamma_mag[j]`` per gamma column;
    * one row per up-jump rate ``eta[i]``: ``1/(eta[i]-beta[k])`` and
      ``xbar**gamma_mag[j]/(eta[i]+gamma_mag[j])``;
    * row m+1: ``xbar**beta[k]`` and ``1``;
    * one row per down-jump rate ``theta[j]``: ``xbar**beta[k]/(theta[j]+beta[k])``
      and ``1/(theta[j]-gamma_mag[l])``.

    When ``m = 0`` (or ``n = 0``) the corresponding rate rows are simply
    absent and the system shrinks to ``(n+2)`` (resp. ``(m+2)``) unknowns.
    """
    m, n = roots.m, roots.n
    size = m + n + 2
    xbar = math.exp(problem.h - problem.H)
    beta = roots.beta
    gamma = roots.gamma_mag

    mat = np.empty((size, size), dtype=float)
    xbar_beta = [xbar**b for b in beta]
    xbar_gamma = [xbar**g for g in gamma]

    for k in range(m + 1):
        mat[0, k] = 1.0
        mat[m + 1, k] = xbar_beta[k]
    for j in range(n + 1):
        mat[0, m + 1 + j] = xbar_gamma[j]
        mat[m + 1, m + 1 + j] = 1.0
    for i, e in enumerate(roots.eta):
        row = 1 + i
        for k in range(m + 1):
            mat[row, k] = 1.0 / (e - beta[k])
        for j in range(n + 1):
            mat[row, m + 1 + j] = xbar_gamma[j] / (e + gamma[j])
    for jj, t in enumerate(roots.theta):
        row = m + 2 + jj
        for k in range(m + 1):
            mat[row, k] = xbar_beta[k] / (t + beta[k])
        for j in range(n + 1):
            mat[row, m + 1 + j] = 1.0 / (t - gamma[j])

    varpi = np.empty(size, dtype=float)
    for k in range(m + 1):
        varpi[k] = math.exp(beta[k] * (problem.x - problem.H))
    for j in range(n + 1):
        varpi[m + 1 + j] = math.exp(-gamma[j] * (problem.x - problem.h))
    return mat, varpi


@dataclass(frozen=True)
class LinearSolution:
    """Solution of a small dense system plus a pivot-ratio condition estimate."""

    w: np.ndarray
    condition: float


def solve_linear(mat: np.ndarray, rhs: np.ndarray) -> LinearSolution:
    """Solve ``mat @ w = rhs`` by Gaussian elimination with partial pivoting.

    Raises ``SingularMatrix`` when a pivot falls below ``1e-13`` of its row
    scale. The condition estimate is the ratio of the largest to the smallest
    pivot magnitude; it is a cheap indicator, not a rigorous condition number.
    """
    a = np.array(mat, dtype=float, copy=True)
    b = np.array(rhs, dtype=float, copy=True).reshape(-1)
    size = a.shape[0]
    if a.shape != (size, size) or b.shape != (size,):
        raise ValidationError(f"dimension mismatch: matrix {a.shape}, rhs {b.shape}")

    piv_max = 0.0
    piv_min = math.inf
    for k in range(size):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        pivot = a[p, k]
        row_scale = float(np.max(np.abs(a[p, :])))
        if abs(pivot) < _PIVOT_REL * max(row_scale, 1e-300):
            raise SingularMatrix(
                f"pivot {pivot!r} in column {k} below {_PIVOT_REL} of row scale {row_scale!r}"
            )
        if p != k:
            a[[k, p], :] = a[[p, k], :]
            b[[k, p]] = b[[p, k]]
        piv_max = max(piv_max, abs(pivot))
        piv_min = min(piv_min, abs(pivot))
        for i in range(k + 1, size):
            if a[i, k] != 0.0:
                factor = a[i, k] / pivot
                a[i, k + 1 :] -= factor * a[k, k + 1 :]
                b[i] -= factor * b[k]
                a[i, k] = 0.0

    w = np.empty(size, dtype=float)
    for k in range(size - 1, -1, -1):
        w[k] = (b[k] - float(np.dot(a[k, k + 1 :], w[k + 1 :]))) / a[k, k]
    return LinearSolution(w=w, condition=piv_max / piv_min)


def expected_discounted_payoff(problem: BarrierProblem, roots: RootSet, fvec: PayoffVector) -> float:
    """Evaluate ``E[e^{-alpha tau} f(X_tau)]`` for one corridor.

    Returns the raw transform value; tiny negatives from roundoff on
    nonnegative payoffs are left to the caller's clamping policy so that this
    stays testable.
    """
    if abs(problem.alpha - roots.alpha) > 1e-12 * (1.0 + abs(problem.alpha)):
        raise ValidationError(
            f"discount mismatch: problem.alpha={problem.alpha} vs roots.alpha={roots.alpha}"
        )
    if len(fvec.f_u) != roots.m + 1 or len(fvec.f_d) != roots.n + 1:
        raise ValidationError(
            f"payoff vector sized ({len(fvec.f_u)}, {len(fvec.f_d)}) does not match "
            f"a ({roots.m}, {roots.n}) root set"
        )
    mat, varpi = build_system(problem, roots)
    sol = solve_linear(mat, fvec.as_array())
    return float(np.dot(varpi, sol.w))
