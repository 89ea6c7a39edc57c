import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confract.errors import DomainError, ExpressionSyntaxError, UnknownIdentifierError
from confract.expression import MAX_LENGTH, Node, compile_time_function, evaluate, parse_expression, parse_rational


def test_parse_one_minus_decay():
    ast = parse_expression("1 - exp(-u)")
    assert ast == Node("sub", None, (Node("const", 1.0), Node("call", "exp", (Node("neg", None, (Node("var", "u"),)),))))
    f = compile_time_function("1 - exp(-u)", 0.5)
    assert f(1.0) == pytest.approx(1 - math.exp(-2.0), rel=1e-15)


def test_parse_product():
    ast = parse_expression("sin(t)*exp(-u)")
    assert ast.kind == "mul"
    assert [c.value for c in ast.children] == ["sin", "exp"]


def test_unbalanced_parenthesis_location():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("exp(-u")
    assert info.value.offset == 7
    assert info.value.expected == (")",)


@pytest.mark.parametrize("text, offset", [("2*", 3), ("1 + + ", 5), ("(1", 3), ("1 2", 3), ("", 1), ("sin 2", 5)])
def test_error_offsets(text, offset):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert info.value.offset == offset


def test_unknown_identifier_lists_vocabulary():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expression("1 + log(t)")
    assert info.value.offset == 5
    for word in ("t", "u", "exp", "sin", "cos", "sqrt"):
        assert word in str(info.value)


def test_bad_character_and_length_limit():
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression("1 $ 2")
    assert info.value.offset == 3
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("1" + "+1" * MAX_LENGTH)
    parse_expression(" " * (MAX_LENGTH - 1) + "1")


def test_precedence():
    env = {"t": 2.0, "u": 3.0}
    cases = {"2^3^2": 2.0 ** 9, "-2^2": 4.0, "2*-3": -6.0, "1-2-3": -4.0, "8/4/2": 1.0,
             "2+3*4": 14.0, "(2+3)*4": 20.0, "--t": 2.0, "sqrt(4)*u": 6.0, "1e-1*10": 1.0, ".5+t": 2.5}
    for text, expected in cases.items():
        assert evaluate(parse_expression(text), env) == pytest.approx(expected), text


def test_whitespace_insensitive():
    assert parse_expression(" sin ( t ) *exp( - u ) ") == parse_expression("sin(t)*exp(-u)")


@given(alpha=st.floats(0.1, 1.0), t=st.floats(0.0, 20.0))
def test_u_is_conformable_time(alpha, t):
    f = compile_time_function("u", alpha)
    assert f(t) == pytest.approx(t**alpha / alpha, rel=1e-14, abs=1e-300)


def test_compiled_function_is_vectorized():
    f = compile_time_function("cos(t) + 2", 1.0)
    assert np.allclose(f(np.array([0.0, math.pi])), [3.0, 1.0])
    assert compile_time_function("3", 0.4)(np.zeros(4)).shape == (4,)


def test_rational_conversion():
    F = parse_rational("1/(s*(s+1))")
    assert F.numer == (1.0,)
    assert F.denom == (1.0, 1.0, 0.0)
    G = parse_rational("(2*s + 3) / (s^2 - 4) - 1/s")
    for s in (1.5 + 2j, 3.0, -0.5j):
        assert G(s) == pytest.approx((2 * s + 3) / (s * s - 4) - 1 / s, rel=1e-14)


@pytest.mark.parametrize("text", ["exp(s)", "s^0.5", "s^-1", "1/(s-s)"])
def test_non_rational_input_is_rejected(text):
    with pytest.raises(DomainError):
        parse_rational(text)


def test_time_variable_not_allowed_in_rational():
    with pytest.raises(UnknownIdentifierError):
        parse_rational("1/(t+1)")
