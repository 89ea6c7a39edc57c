import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from confract.errors import AccuracyError, DivergenceError, DomainError, EvaluationError
from confract.quadrature import QuadratureSpec, adaptive_simpson, graded_rule, integrate, laplace_integral


@pytest.mark.parametrize("kwargs", [dict(t_max=0.0), dict(n_nodes=4), dict(n_nodes=8.5), dict(scheme="trapezoid")])
def test_spec_validation(kwargs):
    with pytest.raises(DomainError):
        QuadratureSpec(**kwargs)


@pytest.mark.parametrize("both", [False, True])
def test_graded_rule_integrates_polynomials(both):
    x, w = graded_rule(16, 20, both)
    assert np.all((x > 0) & (x < 1))
    for k in range(6):
        assert np.sum(w * x**k) == pytest.approx(1 / (k + 1), rel=1e-14)


def test_graded_rule_handles_endpoint_singularity():
    # the power-mapped innermost panel turns x**-0.5 into a polynomial
    for levels in (20, 30):
        x, w = graded_rule(16, levels)
        assert np.sum(w * x**-0.5) == pytest.approx(2.0, rel=1e-13)


@pytest.mark.parametrize("p", [-0.5, -0.8, -0.9])
def test_inner_mapping_beats_plain_grading(p):
    exact = 1 / (p + 1)
    x, w = graded_rule(16, 20)
    mapped = abs(np.sum(w * x**p) - exact)
    x, w = graded_rule(16, 20, inner_power=1)
    plain = abs(np.sum(w * x**p) - exact)
    # x**-0.9 stays hard: the mapped panel still sees w**-0.2
    assert mapped <= 1e-3 * exact
    assert mapped <= 1e-2 * plain


def test_adaptive_simpson_against_closed_form():
    assert adaptive_simpson(np.sin, 0.0, math.pi, tol=1e-12) == pytest.approx(2.0, abs=1e-11)
    assert adaptive_simpson(np.cos, 1.0, 1.0) == 0.0


def test_adaptive_simpson_gives_up_with_residual():
    with pytest.raises(AccuracyError) as info:
        adaptive_simpson(lambda x: np.sign(x - 0.3), 0.0, 1.0, tol=1e-30, max_rounds=4)
    assert info.value.residual > 0


def test_integrate_schemes_agree():
    f = lambda x: np.exp(-x) * np.sqrt(x)
    oracle = sp_integrate.quad(f, 0, 3, epsabs=0, epsrel=1e-13)[0]
    assert integrate(f, 0.0, 3.0) == pytest.approx(oracle, rel=1e-12)
    g = lambda x: np.exp(-x) * np.cos(3 * x)
    z = complex(-1, 3)
    oracle = ((np.exp(3 * z) - 1) / z).real
    simpson = QuadratureSpec(scheme="adaptive-simpson", tol=1e-11)
    assert integrate(g, 0.0, 3.0, simpson) == pytest.approx(oracle, rel=1e-9)
    assert integrate(g, 0.0, 3.0, grade="none") == pytest.approx(oracle, rel=1e-12)


def test_integrate_reports_non_finite_values():
    with pytest.raises(EvaluationError):
        integrate(lambda x: 1 / (x - 0.5) ** 2 * np.inf, 0.0, 1.0)
    with pytest.raises(DomainError):
        integrate(np.sin, 1.0, 0.0)


def test_laplace_integral_classical_pairs():
    assert laplace_integral(lambda u: np.ones_like(u), 2.0) == pytest.approx(0.5, rel=1e-14)
    assert laplace_integral(np.sin, 1.5 + 0.5j) == pytest.approx(1 / ((1.5 + 0.5j) ** 2 + 1), rel=1e-12)


def test_laplace_integral_divergence():
    with pytest.raises(DivergenceError):
        laplace_integral(lambda u: np.exp(2 * u), 1.0)
    with pytest.raises(DivergenceError):
        laplace_integral(np.cos, 1.0, growth_rate=1.0)
