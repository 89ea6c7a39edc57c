import math

import numpy as np
import pytest

from confract.calculus import to_u
from confract.errors import (ContourParameterError, DomainError, IllConditionedPolesError, InconsistentPolesError,
                             LookupFailure)
from confract.forward import FrequencyExpression, forward_transform
from confract.inverse import (BromwichSpec, Pole, PoleSet, invert_bromwich, invert_residues, invert_via_classical,
                              partial_fractions)


def rational(numer, denom):
    return FrequencyExpression.rational(numer, denom)


ONE_OVER_S = rational([1.0], [1.0, 0.0])
STEP_MINUS_DECAY = rational([1.0], [1.0, 1.0, 0.0])

# rational corpus with independently known classical inverses in u
CORPUS = [
    (rational([1.0], [1.0, 1.0]), lambda u: np.exp(-u)),
    (STEP_MINUS_DECAY, lambda u: 1 - np.exp(-u)),
    (rational([1.0], [1.0, 0.0, 0.0]), lambda u: u),
    (rational([1.0], [1.0, 0.0, 1.0]), np.sin),
    (rational([1.0, 0.0], [1.0, 0.0, 4.0]), lambda u: np.cos(2 * u)),
    (rational([1.0], [1.0, 2.0, 1.0]), lambda u: u * np.exp(-u)),
    (rational([1.0], [1.0, 3.0, 3.0, 1.0]), lambda u: u * u * np.exp(-u) / 2),
    (rational([1.0, 1.0], [1.0, 2.0, 5.0]), lambda u: np.exp(-u) * np.cos(2 * u)),
    (rational([2.0, 0.0, 1.0], [1.0, 4.0, 5.0, 2.0, 0.0]), None),
]


def test_pair_table_route_examples():
    assert invert_via_classical(ONE_OVER_S, 0.4, 7.0) == 1.0
    assert invert_via_classical(rational([1.0], [1.0, -1.5]), 0.5, 1.0) == pytest.approx(math.exp(3.0), rel=1e-15)
    inv_sq = rational([1.0], [1.0, 0.0, 0.0])
    assert invert_via_classical(inv_sq, 0.5, 4.0) == pytest.approx(4.0, rel=1e-15)
    assert invert_via_classical(inv_sq, 0.5, 4.0, method="bromwich") == pytest.approx(4.0, rel=1e-6)
    with pytest.raises(LookupFailure):
        invert_via_classical(rational([1.0], [1.0, 3.0, 2.0]), 0.5, 1.0)


def test_bromwich_examples():
    decay = rational([1.0], [1.0, 1.0])
    assert invert_bromwich(decay, 0.5, 1.0, BromwichSpec(c=1.0)) == pytest.approx(math.exp(-2.0), abs=1e-6)
    assert invert_bromwich(ONE_OVER_S, 0.9, 2.0, BromwichSpec(c=1.0)) == pytest.approx(1.0, abs=1e-6)
    expected = 1 - math.exp(-(1.3**0.7) / 0.7)
    assert invert_bromwich(STEP_MINUS_DECAY, 0.7, 1.3, BromwichSpec(c=0.5)) == pytest.approx(expected, abs=1e-6)


def test_bromwich_parameter_errors():
    with pytest.raises(ContourParameterError):
        invert_bromwich(rational([1.0], [1.0, -2.0]), 0.5, 1.0, BromwichSpec(c=1.0))
    with pytest.raises(DomainError):
        invert_bromwich(ONE_OVER_S, 0.5, 0.0)
    with pytest.raises(DomainError):
        BromwichSpec(n_nodes=10)


def test_partial_fraction_examples():
    P = partial_fractions(STEP_MINUS_DECAY)
    got = {round(p.location.real, 12): p.coeffs[0] for p in P.poles}
    assert got[0.0] == pytest.approx(1.0) and got[-1.0] == pytest.approx(-1.0)
    P = partial_fractions(rational([1.0], [1.0, -0.7]))
    assert len(P.poles) == 1 and P.poles[0].location == pytest.approx(0.7) and P.poles[0].coeffs == (1.0,)
    P = partial_fractions(rational([1.0], [1.0, 0.0, 0.0]))
    (pole,) = P.poles
    assert pole.multiplicity == 2 and pole.location == 0
    assert pole.coeffs == pytest.approx((0.0, 1.0), abs=1e-15)


def test_triple_pole_is_merged():
    (pole,) = partial_fractions(rational([1.0], [1.0, 3.0, 3.0, 1.0])).poles
    assert pole.multiplicity == 3
    assert pole.location == pytest.approx(-1.0, abs=1e-12)
    assert pole.coeffs == pytest.approx((0.0, 0.0, 1.0), abs=1e-10)


def test_nearly_coincident_poles_merge_when_indistinguishable():
    den = np.poly([-1.0, -1.0 - 1e-6])
    poles = partial_fractions(rational([1.0], den)).poles
    assert [p.multiplicity for p in poles] == [2]
    t = 1.0
    exact = (np.exp(-t) - np.exp(-(1 + 1e-6) * t)) / 1e-6
    assert invert_residues(partial_fractions(rational([1.0], den)), t, 1.0) == pytest.approx(exact, rel=1e-9)


def test_close_but_resolvable_poles_stay_simple():
    den = np.poly([-1.0, -1.0005])
    poles = partial_fractions(rational([1.0], den)).poles
    assert sorted(p.multiplicity for p in poles) == [1, 1]
    exact = (np.exp(-1.0) - np.exp(-1.0005)) / 5e-4
    assert invert_residues(partial_fractions(rational([1.0], den)), 1.0, 1.0) == pytest.approx(exact, rel=1e-9)


def test_cluster_that_cancels_catastrophically_is_ill_conditioned():
    den = np.poly([-1.0, -1.0 - 1e-4, -1.0 - 2e-4])
    with pytest.raises(IllConditionedPolesError):
        partial_fractions(rational([1.0], den))


def test_partial_fractions_preconditions():
    with pytest.raises(DomainError):
        partial_fractions(rational([1.0, 0.0], [1.0, 1.0]))
    with pytest.raises(DomainError):
        partial_fractions(FrequencyExpression.blackbox(lambda s: 1 / s))


def test_residue_examples():
    assert invert_residues(PoleSet.simple({2.0: 1.0}), 0.5, 1.0) == pytest.approx(math.exp(4.0), rel=1e-15)
    P = PoleSet.simple({0.0: 1.0, -1.0: -1.0})
    assert invert_residues(P, 1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-12)
    double = PoleSet((Pole(0.0, 2, (0.0, 1.0)),))
    assert invert_residues(double, 0.5, 4.0) == pytest.approx(4.0, rel=1e-15)


def test_inconsistent_pole_sets():
    with pytest.raises(InconsistentPolesError):
        invert_residues(PoleSet.simple({1j: 1.0}), 1.0, 1.0)
    with pytest.raises(InconsistentPolesError):
        PoleSet((Pole(1.0, 1, (1.0,)), Pole(1.0, 1, (2.0,))))
    with pytest.raises(DomainError):
        Pole(0.0, 2, (1.0,))


@pytest.mark.parametrize("index", range(len(CORPUS)))
@pytest.mark.parametrize("t", [0.1, 1.0, 10.0])
def test_routes_agree(index, t):
    F, inverse = CORPUS[index]
    alpha = 0.6
    res = invert_residues(F, alpha, t)
    if inverse is not None:
        assert res == pytest.approx(inverse(to_u(t, alpha)), rel=1e-9, abs=1e-9)
    assert abs(invert_bromwich(F, alpha, t) - res) <= 1e-5 * (1 + abs(res))
    try:
        pair = invert_via_classical(F, alpha, t)
    except LookupFailure:
        return
    assert abs(pair - res) <= 1e-9 * (1 + abs(res))


@pytest.mark.parametrize("index", range(len(CORPUS)))
def test_forward_of_inverse_reproduces_F(index):
    F, _ = CORPUS[index]
    alpha = 0.7
    P = partial_fractions(F)
    f = lambda t: invert_residues(P, alpha, t)
    for s in (2.0, 5.0):
        assert forward_transform(f, alpha, s) == pytest.approx(F(s), rel=1e-6)


@pytest.mark.parametrize("alpha", [0.2, 0.5, 0.9])
def test_alpha_enters_only_through_u(alpha):
    P = partial_fractions(CORPUS[-1][0])
    t = np.array([0.3, 1.0, 2.5])
    assert np.array_equal(invert_residues(P, alpha, t), invert_residues(P, 1.0, to_u(t, alpha)))
