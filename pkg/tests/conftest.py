"""Shared fixtures: the baseline double-exponential contract and seeded
random generators for valid parameter sets."""

from __future__ import annotations


import numpy as np
import pytest

from stockloan import JumpParams, LevyModel, MarketParams


def baseline_market(**overrides) -> MarketParams:
    params = dict(r=0.05, delta=0.02, sigma=0.15, gamma=0.07, q=80.0, d=80.0 / 90.0)
    params.update(overrides)
    return MarketParams(**params)


def baseline_jumps(lam: float = 0.5, **overrides) -> JumpParams:
    params = dict(lam=lam, p=[0.09], eta=[2.3], qw=[0.91], theta=[1.8])
    params.update(overrides)
    return JumpParams(**params)


def baseline_model(lam: float = 0.5, **market_overrides) -> LevyModel:
    return LevyModel(baseline_market(**market_overrides), baseline_jumps(lam))


def random_jumps(rng: np.random.Generator, m: int | None = None, n: int | None = None) -> JumpParams:
    """A valid two-sided mixture with well-separated rates and non-tiny weights."""
    m = int(rng.integers(1, 4)) if m is None else m
    n = int(rng.integers(1, 4)) if n is None else n
    eta = 1.0 + np.cumsum(rng.uniform(0.3, 2.0, size=m)) if m else np.empty(0)
    theta = np.cumsum(rng.uniform(0.3, 2.0, size=n)) if n else np.empty(0)
    weights = rng.uniform(0.2, 1.0, size=m + n)
    weights /= weights.sum()
    return JumpParams(
        lam=float(rng.uniform(0.1, 2.0)),
        p=tuple(weights[:m]),
        eta=tuple(eta),
        qw=tuple(weights[m:]),
        theta=tuple(theta),
    )


def random_model(rng: np.random.Generator, m: int | None = None, n: int | None = None) -> LevyModel:
    """A valid model with positive dividends (so finiteness always holds)."""
    r = float(rng.uniform(0.0, 0.08))
    market = MarketParams(
        r=r,
        delta=float(rng.uniform(0.005, 0.05)),
        sigma=float(rng.uniform(0.1, 0.5)),
        gamma=r + float(rng.uniform(0.0, 0.1)),
        q=float(rng.uniform(20.0, 150.0)),
        d=float(rng.uniform(0.5, 1.0)),
    )
    return LevyModel(market, random_jumps(rng, m=m, n=n))


def random_barrier(rng: np.random.Generator) -> tuple[float, float, float]:
    """Random (h, H, x) with x strictly inside."""
    h = float(rng.uniform(-1.0, 1.0))
    width = float(rng.uniform(0.2, 2.5))
    x = h + width * float(rng.uniform(0.1, 0.9))
    return h, h + width, x


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(987654321)
