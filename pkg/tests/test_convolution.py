import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from confract.calculus import TimeFunction, to_u
from confract.convolution import (WeightedNormSpec, check_convolution_algebra, check_convolution_theorem,
                                  check_young, conv_alpha, conv_function, weighted_norm)
from confract.errors import DomainError, EvaluationError, LookupFailure
from confract.forward import pair_lookup
from confract.quadrature import QuadratureSpec
from confract.verify import SmoothFunction, random_smooth


def decay(alpha, rate=1.0):
    return TimeFunction(lambda t: np.exp(-rate * to_u(t, alpha)), "exp(-u)", (1.0, -rate))


def direct_conv(f, g, alpha, t):
    """Oracle: the defining integral in p, with the p^(alpha-1) weight handled by scipy's algebraic weight."""
    def integrand(p):
        return f(p) * g((t**alpha - p**alpha) ** (1 / alpha))
    return integrate.quad(integrand, 0, t, weight="alg", wvar=(alpha - 1, 0), epsabs=0, epsrel=1e-12, limit=200)[0]


def test_unit_convolution_is_weight_integral():
    assert conv_alpha(1.0, 1.0, 0.5, 4.0) == pytest.approx(4.0, rel=1e-12)


def test_unit_with_eigenfunction():
    alpha, t = 0.7, 2.0
    expected = 1 - math.exp(-(2**0.7) / 0.7)
    assert conv_alpha(1.0, decay(alpha), alpha, t) == pytest.approx(expected, abs=1e-7)
    assert direct_conv(lambda p: 1.0, decay(alpha), alpha, t) == pytest.approx(expected, abs=1e-9)


def test_zero_factor():
    assert conv_alpha(np.sin, 0.0, 0.4, 3.0) == 0.0


def test_against_time_domain_oracle():
    alpha, t = 0.45, 1.7
    f = lambda p: np.cos(p) + p
    g = lambda p: np.exp(-p)
    assert conv_alpha(f, g, alpha, t) == pytest.approx(direct_conv(f, g, alpha, t), rel=1e-9)


def test_simpson_scheme_agrees():
    alpha, t = 0.6, 1.5
    f, g = SmoothFunction((1.0, 0.5, 0.2), 1.0, alpha), decay(alpha)
    gauss = conv_alpha(f, g, alpha, t)
    simpson = conv_alpha(f, g, alpha, t, QuadratureSpec(scheme="adaptive-simpson", tol=1e-12))
    assert simpson == pytest.approx(gauss, rel=1e-8)


def test_vectorized_times_and_negative_time():
    ts = np.array([0.0, 0.5, 2.0])
    values = conv_alpha(1.0, 1.0, 0.5, ts)
    assert values == pytest.approx(to_u(ts, 0.5), abs=1e-12)
    with pytest.raises(DomainError):
        conv_alpha(1.0, 1.0, 0.5, -1.0)


def test_commutativity_example():
    rep = check_convolution_algebra("commutativity", 1.0, decay(0.6), alpha=0.6, t=1.5)
    assert rep.rel_err <= 1e-7
    assert rep.lhs == pytest.approx(direct_conv(lambda p: 1.0, decay(0.6), 0.6, 1.5), rel=1e-9)


def test_distributivity_cancellation():
    g = decay(0.5)
    minus_g = TimeFunction(lambda t: -g(t))
    rep = check_convolution_algebra("distributivity", np.cos, g, minus_g, alpha=0.5, t=2.0)
    assert rep.lhs == 0.0
    assert rep.abs_err <= 1e-15


def test_scalar_example():
    rep = check_convolution_algebra("scalar", 1.0, 1.0, c=3.0, alpha=0.5, t=4.0)
    assert rep.lhs == pytest.approx(12.0, rel=1e-12)
    assert rep.rhs == pytest.approx(12.0, rel=1e-12)


def test_unknown_law():
    with pytest.raises(LookupFailure):
        check_convolution_algebra("idempotence", 1.0, 1.0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), law=st.sampled_from(["commutativity", "distributivity", "scalar"]))
def test_linear_laws_on_random_draws(seed, law):
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.3, 1.0))
    f, g, h = (random_smooth(rng, alpha).as_time_function() for _ in range(3))
    rep = check_convolution_algebra(law, f, g, h, float(rng.uniform(-3, 3)), alpha, float(rng.uniform(0.5, 3.0)))
    assert rep.rel_err <= 1e-7


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_associativity_on_random_draws(seed):
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.3, 1.0))
    f, g, h = (random_smooth(rng, alpha).as_time_function() for _ in range(3))
    rep = check_convolution_algebra("associativity", f, g, h, alpha=alpha, t=float(rng.uniform(0.5, 3.0)))
    assert rep.rel_err <= 1e-5
    assert "inner" in rep.note


def test_theorem_examples():
    rep = check_convolution_theorem(1.0, 1.0, 0.5, 2.0)
    assert rep.lhs == pytest.approx(0.25, rel=1e-10)
    assert rep.rhs == pytest.approx(0.25, rel=1e-6)
    rep = check_convolution_theorem(1.0, decay(0.5), 0.5, 1.0)
    assert rep.lhs == pytest.approx(0.5, rel=1e-10)
    assert rep.rhs == pytest.approx(0.5, rel=1e-6)
    rep = check_convolution_theorem(0.0, decay(0.5), 0.5, 1.0)
    assert rep.lhs == 0 and rep.rhs == 0


PAIRS = [("const", {}), ("exp_eigen", {"lam": -1.0}), ("exp_eigen", {"lam": 0.5}), ("power_alpha", {"k": 1})]


@pytest.mark.parametrize("alpha", [0.4, 1.0])
@pytest.mark.parametrize("first", PAIRS, ids=lambda p: f"{p[0]}{p[1]}")
@pytest.mark.parametrize("second", PAIRS, ids=lambda p: f"{p[0]}{p[1]}")
def test_theorem_over_pair_cross_products(first, second, alpha):
    f, F = pair_lookup(*first, alpha=alpha)
    g, G = pair_lookup(*second, alpha=alpha)
    s = 2.5
    rep = check_convolution_theorem(f, g, alpha, s)
    assert rep.rel_err <= 1e-5
    assert rep.lhs == pytest.approx(F(s) * G(s), rel=1e-6)


def test_weighted_norm_examples():
    for alpha in (0.5, 0.7, 1.0):
        assert weighted_norm(decay(alpha), WeightedNormSpec(1.0, alpha, 100.0)) == pytest.approx(1.0, abs=1e-7)
    # at small alpha, t_max = 100 is only u = 13.3 and the truncated value is 1 - exp(-u_max)
    spec = WeightedNormSpec(1.0, 0.3, 100.0)
    assert weighted_norm(decay(0.3), spec) == pytest.approx(1 - math.exp(-spec.u_max), abs=1e-12)
    assert weighted_norm(decay(0.5), WeightedNormSpec(2.0, 0.5, 100.0)) == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert weighted_norm(0.0, WeightedNormSpec(1.0, 0.5, 10.0)) == 0.0


def test_weighted_norm_against_time_domain_oracle():
    alpha, t_max = 0.5, 3.0
    f = lambda t: np.cos(t) * np.exp(-t)
    oracle = integrate.quad(lambda t: np.abs(f(t)) ** 2, 0, t_max, weight="alg", wvar=(alpha - 1, 0),
                            epsabs=0, epsrel=1e-12, limit=200)[0] ** 0.5
    assert weighted_norm(f, WeightedNormSpec(2.0, alpha, t_max)) == pytest.approx(oracle, rel=1e-7)


@pytest.mark.parametrize("alpha", [0.5, 0.8, 1.0])
def test_norm_truncation_is_monotone(alpha):
    f = SmoothFunction((1.0, 0.3, 0.1), 1.2, alpha)
    t1 = float((alpha * 40.0) ** (1 / alpha))
    a = weighted_norm(f, WeightedNormSpec(1.0, alpha, t1))
    b = weighted_norm(f, WeightedNormSpec(1.0, alpha, 2 * t1))
    assert abs(a - b) < 1e-8


def test_weighted_norm_spec_validation():
    with pytest.raises(DomainError):
        WeightedNormSpec(0.5)
    with pytest.raises(DomainError):
        WeightedNormSpec(1.0, 0.5, -1.0)
    spec = WeightedNormSpec(1.0, 0.5)
    assert math.exp(-spec.u_max) < 1e-14
    assert spec.tail_estimate(decay(0.5)) < 1e-13
    assert spec.tail_estimate(TimeFunction(np.sin)) == math.inf


def test_young_equality_edge():
    rep = check_young(decay(0.5), decay(0.5), 1.0, 0.5)
    assert rep.passed
    assert rep.rhs == pytest.approx(1.0, abs=1e-7)
    assert rep.lhs == pytest.approx(1.0, abs=1e-7)


def test_young_with_zero_factor():
    rep = check_young(0.0, decay(0.5), 2.0, 0.5)
    assert rep.passed
    assert rep.lhs == 0.0 and rep.rhs == 0.0


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("n", [1.0, 2.0])
def test_young_on_random_positive_mixtures(seed, n):
    rng = np.random.default_rng(seed)
    alpha = float(rng.uniform(0.3, 1.0))
    f, g = (random_smooth(rng, alpha).as_time_function() for _ in range(2))
    rep = check_young(f, g, n, alpha)
    assert rep.passed
    assert rep.slack >= 0


def test_young_with_overflowing_factor():
    grow = TimeFunction(lambda t: np.exp(to_u(t, 1.0)))
    with np.errstate(over="ignore"), pytest.raises(EvaluationError):
        check_young(grow, grow, 1.0, 1.0, t_max=2000.0)


def test_conv_function_growth_bound():
    f = conv_function(decay(0.5), decay(0.5, 2.0), 0.5)
    m, a = f.growth_bound
    assert a == pytest.approx(-1.0 + 1e-3)
    assert f.check_growth(0.5, np.linspace(0.0, 30.0, 40))
