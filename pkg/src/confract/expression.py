"""Expression language for time functions and rational transforms.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := unary ('^' factor)?
    unary  := '-' unary | atom
    atom   := number | 't' | 'u' | func '(' expr ')' | '(' expr ')'
    func   := 'exp' | 'sin' | 'cos' | 'sqrt'

``u`` stands for ``t**alpha / alpha``.  Frequency-domain input uses the same
grammar with the variable ``s`` instead.  Error offsets are 1-based
character columns; the end of input is ``len(text) + 1``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .calculus import TimeFunction, as_order, to_u
from .errors import DomainError, ExpressionSyntaxError, UnknownIdentifierError
from .forward import FrequencyExpression

MAX_LENGTH = 4096
FUNCTIONS = ("exp", "sin", "cos", "sqrt")
TIME_VARIABLES = ("t", "u")
FREQUENCY_VARIABLES = ("s",)

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))")


@dataclass(frozen=True)
class Node:
    """``kind`` is one of const, var, neg, add, sub, mul, div, pow, call."""

    kind: str
    value: float | str | None = None
    children: tuple["Node", ...] = ()

    def __str__(self) -> str:
        if self.kind == "const":
            return repr(self.value)
        if self.kind == "var":
            return str(self.value)
        if self.kind == "neg":
            return f"(-{self.children[0]})"
        if self.kind == "call":
            return f"{self.value}({self.children[0]})"
        op = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}[self.kind]
        return f"({self.children[0]} {op} {self.children[1]})"


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionSyntaxError(f"unexpected character {text[col - 1]!r}", col,
                                        ("number", "identifier", "operator"))
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start + 1))
        pos = m.end()
    toks.append(_Tok("end", "", len(text) + 1))
    return toks


class _Parser:
    def __init__(self, text: str, variables: Iterable[str]):
        self.toks = _tokenize(text)
        self.i = 0
        self.variables = tuple(variables)

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _fail(self, expected: tuple[str, ...]):
        tok = self.tok
        found = "end of input" if tok.kind == "end" else repr(tok.text)
        raise ExpressionSyntaxError(f"unexpected {found}", tok.col, expected)

    def _take(self, text: str) -> None:
        if self.tok.text != text or self.tok.kind != "op":
            self._fail((text,))
        self.i += 1

    def parse(self) -> Node:
        node = self.expr()
        if self.tok.kind != "end":
            self._fail(("+", "-", "*", "/", "^", "end of input"))
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = "add" if self.tok.text == "+" else "sub"
            self.i += 1
            node = Node(op, None, (node, self.term()))
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = "mul" if self.tok.text == "*" else "div"
            self.i += 1
            node = Node(op, None, (node, self.factor()))
        return node

    def factor(self) -> Node:
        base = self.unary()
        if self.tok.kind == "op" and self.tok.text == "^":
            self.i += 1
            return Node("pow", None, (base, self.factor()))
        return base

    def unary(self) -> Node:
        if self.tok.kind == "op" and self.tok.text == "-":
            self.i += 1
            return Node("neg", None, (self.unary(),))
        return self.atom()

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "num":
            self.i += 1
            return Node("const", float(tok.text))
        if tok.kind == "name":
            if tok.text in self.variables:
                self.i += 1
                return Node("var", tok.text)
            if tok.text in FUNCTIONS:
                self.i += 1
                self._take("(")
                arg = self.expr()
                self._take(")")
                return Node("call", tok.text, (arg,))
            vocab = ", ".join(self.variables + FUNCTIONS)
            raise UnknownIdentifierError(f"unknown identifier {tok.text!r}; known: {vocab}", tok.col)
        if tok.kind == "op" and tok.text == "(":
            self.i += 1
            node = self.expr()
            self._take(")")
            return node
        self._fail(("number", *self.variables, *FUNCTIONS, "(", "-"))


def parse_expression(text: str, variables: Iterable[str] = TIME_VARIABLES) -> Node:
    """Parse ``text`` into an AST over the given variable names."""
    if len(text) > MAX_LENGTH:
        raise ExpressionSyntaxError(f"expression longer than {MAX_LENGTH} characters", MAX_LENGTH + 1)
    return _Parser(text, variables).parse()


# ---------------------------------------------------------------------------
# evaluation

_CALLS = {"exp": np.exp, "sin": np.sin, "cos": np.cos, "sqrt": np.sqrt}


def evaluate(node: Node, env: dict):
    k = node.kind
    if k == "const":
        return node.value
    if k == "var":
        return env[node.value]
    if k == "neg":
        return -evaluate(node.children[0], env)
    if k == "call":
        return _CALLS[node.value](evaluate(node.children[0], env))
    a, b = (evaluate(c, env) for c in node.children)
    if k == "add":
        return a + b
    if k == "sub":
        return a - b
    if k == "mul":
        return a * b
    if k == "div":
        return a / b
    return np.power(a, b)


def compile_time_function(text: str, alpha) -> TimeFunction:
    """Time function from an expression in ``t`` and ``u``."""
    alpha = as_order(alpha)
    ast = parse_expression(text, TIME_VARIABLES)

    def fn(t):
        return evaluate(ast, {"t": t, "u": to_u(t, alpha)})

    return TimeFunction(fn, source=text)


# ---------------------------------------------------------------------------
# rational functions of s


def _poly_add(p, q):
    n = max(len(p), len(q))
    return np.pad(p, (n - len(p), 0)) + np.pad(q, (n - len(q), 0))


def _rational(node: Node) -> tuple[np.ndarray, np.ndarray]:
    k = node.kind
    if k == "const":
        return np.array([node.value]), np.array([1.0])
    if k == "var":
        return np.array([1.0, 0.0]), np.array([1.0])
    if k == "neg":
        n, d = _rational(node.children[0])
        return -n, d
    if k == "call":
        raise DomainError(f"{node.value}(...) is not rational in s")
    if k == "pow":
        base, exp_node = node.children
        if exp_node.kind != "const" or exp_node.value != int(exp_node.value) or exp_node.value < 0:
            raise DomainError("rational expressions allow only non-negative integer powers")
        n, d = _rational(base)
        pn, pd = np.array([1.0]), np.array([1.0])
        for _ in range(int(exp_node.value)):
            pn, pd = np.convolve(pn, n), np.convolve(pd, d)
        return pn, pd
    (n1, d1), (n2, d2) = (_rational(c) for c in node.children)
    if k == "add":
        return _poly_add(np.convolve(n1, d2), np.convolve(n2, d1)), np.convolve(d1, d2)
    if k == "sub":
        return _poly_add(np.convolve(n1, d2), -np.convolve(n2, d1)), np.convolve(d1, d2)
    if k == "mul":
        return np.convolve(n1, n2), np.convolve(d1, d2)
    if not np.any(n2):
        raise DomainError("division by the zero polynomial")
    return np.convolve(n1, d2), np.convolve(d1, n2)


def parse_rational(text: str) -> FrequencyExpression:
    """Rational :class:`FrequencyExpression` from an expression in ``s``."""
    ast = parse_expression(text, FREQUENCY_VARIABLES)
    num, den = _rational(ast)
    scale = max(np.max(np.abs(num)), 1e-300)
    num = np.where(np.abs(num) <= 1e-15 * scale, 0.0, num)
    return FrequencyExpression.rational(num, den, source=text)
