"""Parameter validation, the Levy exponent, and its derived quantities."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from stockloan import (
    JumpParams,
    LevyModel,
    MarketParams,
    PoleEvaluation,
    ValidationError,
    check_finiteness,
    drifted_exponent,
    exponent_derivative,
    exponent_minimum,
    jump_mean_zeta,
    levy_exponent,
)

from conftest import random_model, baseline_jumps, baseline_market, baseline_model


# ---------------------------------------------------------------------------
# mean relative jump size
# ---------------------------------------------------------------------------


def test_zeta_single_up_component_is_one():
    jumps = JumpParams(lam=1.0, p=[1.0], eta=[2.0], qw=[], theta=[])
    assert jump_mean_zeta(jumps) == pytest.approx(1.0, abs=1e-15)


def test_zeta_table_mixture_matches_quadrature():
    """The closed-form mixture mean must agree with direct integration of
    (e^y - 1) against the two-sided exponential density."""
    jumps = baseline_jumps()
    p1, e1 = jumps.p[0], jumps.eta[0]
    w1, t1 = jumps.qw[0], jumps.theta[0]
    # exponents combined so the integrand never overflows at large |y|
    up, _ = quad(lambda y: p1 * e1 * (math.exp((1.0 - e1) * y) - math.exp(-e1 * y)), 0, np.inf)
    down, _ = quad(lambda y: w1 * t1 * (math.exp((1.0 + t1) * y) - math.exp(t1 * y)), -np.inf, 0)
    oracle = up + down
    zeta = jump_mean_zeta(jumps)
    assert zeta == pytest.approx(oracle, abs=1e-8)
    # value frozen from the quadrature oracle
    assert zeta == pytest.approx(-0.2557692307692308, abs=1e-12)


def test_zeta_vanishes_for_degenerate_down_jumps():
    jumps = JumpParams(lam=1.0, p=[], eta=[], qw=[1.0], theta=[1e6])
    assert abs(jump_mean_zeta(jumps)) < 1e-5


# ---------------------------------------------------------------------------
# exponent values
# ---------------------------------------------------------------------------


def test_exponent_vanishes_at_origin(rng):
    for _ in range(20):
        model = random_model(rng)
        assert abs(levy_exponent(model, 0.0)) < 1e-11
        assert abs(drifted_exponent(model, 0.0)) < 1e-11


def test_exponent_pure_diffusion_is_quadratic():
    # r chosen so the drift comes out at 0.1 with sigma = 0.15 and no jumps
    market = MarketParams(r=0.11125, delta=0.0, sigma=0.15, gamma=0.11125, q=80.0, d=0.9)
    model = LevyModel(market, baseline_jumps(lam=0.0))
    assert model.mu == pytest.approx(0.1, abs=1e-15)
    assert levy_exponent(model, 2.0) == pytest.approx(0.245, rel=1e-12)


def test_exponent_matches_monte_carlo_moment():
    """G(x) must equal log E[e^{x X_1}]; estimated from one million draws of
    the one-year increment."""
    model = baseline_model()
    rng = np.random.default_rng(20240229)
    size = 1_000_000
    x = 0.5

    increments = model.mu + model.market.sigma * rng.standard_normal(size)
    counts = rng.poisson(model.jumps.lam, size)
    from stockloan import sample_jumps

    for k in range(1, int(counts.max()) + 1):
        idx = counts >= k
        increments[idx] += sample_jumps(model.jumps, rng, int(idx.sum()))

    moments = np.exp(x * increments)
    mean = float(moments.mean())
    se_log = float(moments.std(ddof=1)) / math.sqrt(size) / mean
    assert abs(math.log(mean) - levy_exponent(model, x)) <= 3.0 * se_log


def test_drifted_exponent_is_definitional(rng):
    model = baseline_model()
    for x in rng.uniform(-1.5, 2.0, size=20):
        assert drifted_exponent(model, x) == pytest.approx(
            levy_exponent(model, x) - model.market.gamma * x, abs=1e-14
        )
    zero_gamma = LevyModel(baseline_market(gamma=0.05, r=0.05), baseline_jumps())
    for x in rng.uniform(-1.5, 2.0, size=10):
        assert drifted_exponent(zero_gamma, x) == pytest.approx(
            levy_exponent(zero_gamma, x) - 0.05 * x, abs=1e-14
        )


def test_pole_guard_raises():
    model = baseline_model()
    with pytest.raises(PoleEvaluation):
        levy_exponent(model, 2.3)
    with pytest.raises(PoleEvaluation):
        exponent_derivative(model, -1.8 + 1e-12)


def test_no_pole_guard_without_jumps():
    # without jump intensity the rational term is absent, so former poles are fine
    model = baseline_model(lam=0.0)
    assert math.isfinite(levy_exponent(model, 2.3))


# ---------------------------------------------------------------------------
# derivative
# ---------------------------------------------------------------------------


def test_derivative_pure_diffusion():
    market = MarketParams(r=0.11125, delta=0.0, sigma=0.15, gamma=0.11125, q=80.0, d=0.9)
    model = LevyModel(market, baseline_jumps(lam=0.0))
    x = 0.7
    assert exponent_derivative(model, x) == pytest.approx(0.15**2 * x + 0.1, abs=1e-14)
    assert exponent_derivative(model, x, drifted=True) == pytest.approx(
        0.15**2 * x + 0.1 - 0.11125, abs=1e-14
    )


def test_symmetric_mixture_derivative_at_origin_is_drift():
    jumps = JumpParams(lam=0.7, p=[0.5], eta=[2.0], qw=[0.5], theta=[2.0])
    model = LevyModel(baseline_market(), jumps)
    assert exponent_derivative(model, 0.0) == pytest.approx(model.mu, abs=1e-14)


def test_derivative_matches_finite_differences(rng):
    """Central differences of the exponent at random non-pole points."""
    for _ in range(10):
        model = random_model(rng)
        jumps = model.jumps
        poles = list(jumps.eta) + [-t for t in jumps.theta]
        lo, hi = -jumps.theta[0] + 0.06, jumps.eta[0] - 0.06
        count = 0
        while count < 100:
            x = float(rng.uniform(lo - 2.0, hi + 2.0))
            if min(abs(x - p) for p in poles) < 0.05:
                continue
            count += 1
            step = 1e-6 * (1.0 + abs(x))
            fd = (levy_exponent(model, x + step) - levy_exponent(model, x - step)) / (2 * step)
            der = exponent_derivative(model, x)
            assert der == pytest.approx(fd, rel=1e-6, abs=1e-9)


# ---------------------------------------------------------------------------
# exponent minimum
# ---------------------------------------------------------------------------


def test_minimum_pure_diffusion_at_origin():
    market = MarketParams(r=0.01125, delta=0.0, sigma=0.15, gamma=0.01125, q=80.0, d=0.9)
    model = LevyModel(market, baseline_jumps(lam=0.0))
    assert model.mu == pytest.approx(0.0, abs=1e-15)
    x_star, value = exponent_minimum(model)
    assert x_star == pytest.approx(0.0, abs=1e-12)
    assert value == pytest.approx(0.0, abs=1e-15)


def test_minimum_pure_diffusion_clamped_to_guard():
    """With drift the quadratic vertex sits left of the mixture's first pole,
    so the infimum is reported at the guarded endpoint."""
    market = MarketParams(r=0.11125, delta=0.0, sigma=0.15, gamma=0.11125, q=80.0, d=0.9)
    model = LevyModel(market, baseline_jumps(lam=0.0))
    assert -model.mu / 0.15**2 == pytest.approx(-4.4444, abs=1e-3)
    x_star, value = exponent_minimum(model)
    assert x_star == pytest.approx(-1.8, abs=1e-6)
    assert value == pytest.approx(levy_exponent(model, x_star), abs=1e-15)


def test_minimum_matches_dense_grid_scan():
    """Optimizer against a brute-force scan of the drift-adjusted exponent."""
    model = baseline_model()
    xs = np.linspace(-1.8 + 1e-6, 2.3 - 1e-6, 100_000)
    values = [drifted_exponent(model, float(x)) for x in xs]
    x_star, m_min = exponent_minimum(model, drifted=True)
    assert m_min <= min(values) + 1e-12
    assert m_min == pytest.approx(min(values), abs=1e-8)
    # the contract discount r - gamma must be reachable for pricing
    assert m_min <= 0.05 - 0.07


def test_minimum_bounds_and_grid_domination(rng):
    for _ in range(20):
        model = random_model(rng)
        x_star, m_min = exponent_minimum(model, drifted=True)
        assert m_min <= 1e-12
        lo = -model.jumps.theta[0] + 1e-6
        hi = model.jumps.eta[0] - 1e-6
        for x in rng.uniform(lo, hi, size=1000):
            assert m_min <= drifted_exponent(model, float(x)) + 1e-10


def test_convexity_between_innermost_poles(rng):
    """Chord check: the exponent never rises above the line through two
    surrounding samples on the central interval."""
    for _ in range(20):
        model = random_model(rng)
        lo = -model.jumps.theta[0] + 1e-4
        hi = model.jumps.eta[0] - 1e-4
        xs = np.sort(rng.uniform(lo, hi, size=3))
        g = [levy_exponent(model, float(x)) for x in xs]
        t = (xs[1] - xs[0]) / (xs[2] - xs[0])
        chord = (1 - t) * g[0] + t * g[2]
        assert g[1] <= chord + 1e-10


# ---------------------------------------------------------------------------
# finiteness and caches
# ---------------------------------------------------------------------------


def test_finiteness_table_defaults_ok():
    assert check_finiteness(baseline_model()) is None


def test_finiteness_zero_dividend_large_gamma_ok():
    model = LevyModel(baseline_market(delta=0.0, gamma=1.0), baseline_jumps())
    assert check_finiteness(model) is None


def test_finiteness_violated_without_dividends_or_spread():
    market = MarketParams(r=0.05, delta=0.0, sigma=0.15, gamma=0.05, q=80.0, d=0.9)
    model = LevyModel(market, baseline_jumps(lam=0.0))
    message = check_finiteness(model)
    assert message is not None
    assert "delta" in message


def test_cached_drift_reproducible(rng):
    for _ in range(20):
        model = random_model(rng)
        mkt = model.market
        expected = mkt.r - mkt.delta - 0.5 * mkt.sigma**2 - model.jumps.lam * jump_mean_zeta(model.jumps)
        assert abs(model.mu - expected) <= 1e-14


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "overrides",
    [
        dict(d=0.0),
        dict(d=1.5),
        dict(delta=-0.01),
        dict(gamma=0.03),  # below r
        dict(r=-0.01, gamma=0.05),
        dict(sigma=0.0),
        dict(q=0.0),
    ],
)
def test_market_validation(overrides):
    with pytest.raises(ValidationError):
        baseline_market(**overrides)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(lam=-0.1, p=[0.5], eta=[2.0], qw=[0.5], theta=[1.0]),
        dict(lam=1.0, p=[0.5], eta=[2.0], qw=[0.6], theta=[1.0]),  # weights sum to 1.1
        dict(lam=1.0, p=[0.5, 0.1], eta=[2.0], qw=[0.4], theta=[1.0]),  # length mismatch
        dict(lam=1.0, p=[1.0], eta=[0.9], qw=[], theta=[]),  # eta <= 1
        dict(lam=1.0, p=[0.5, 0.5], eta=[3.0, 2.0], qw=[], theta=[]),  # eta not increasing
        dict(lam=1.0, p=[], eta=[], qw=[1.0], theta=[-1.0]),  # theta <= 0
        dict(lam=1.0, p=[], eta=[], qw=[0.5, 0.5], theta=[2.0, 1.0]),  # theta not increasing
        dict(lam=1.0, p=[], eta=[], qw=[], theta=[]),  # empty mixture
        dict(lam=1.0, p=[-0.1, 1.1], eta=[2.0, 3.0], qw=[], theta=[]),  # negative weight
    ],
)
def test_jump_validation(kwargs):
    with pytest.raises(ValidationError):
        JumpParams(**kwargs)
