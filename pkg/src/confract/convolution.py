"""Fractional convolution, weighted norms and checks of their algebra.

In ``y = p**alpha / alpha`` the fractional convolution

    (f *_alpha g)(t) = integral_0^t f(p) g((t**alpha - p**alpha)**(1/alpha)) p**(alpha-1) dp

becomes a classical convolution on ``[0, u]`` with ``u = t**alpha / alpha``:
``integral_0^u F(y) G(u - y) dy`` where ``F = f o phi^{-1}`` and likewise ``G``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import TimeFunction, as_order, as_time_function, from_u, to_u
from .errors import DivergenceError, DomainError, EvaluationError, LookupFailure
from .forward import ComparisonReport, forward_transform
from .quadrature import DEFAULT_QUAD, QuadratureSpec, _interval_rule, adaptive_simpson, graded_rule, integrate

log = logging.getLogger(__name__)

# node budget of the inner convolution in nested (associativity) checks:
# 8 panels of 8 nodes on each half of [0, u]
INNER_PANEL_NODES = 8
INNER_LEVELS = 7


def _half_rule(n: int, levels: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = graded_rule(n, levels)
    return 0.5 * x, 0.5 * w


def _classical_conv(F: Callable, G: Callable, u: np.ndarray, n: int, levels: int) -> np.ndarray:
    # each half of [0, u] is graded toward its outer end, and the right half is
    # addressed through its distance a to u so that u - y is never rounded
    x, w = _half_rule(n, levels)
    a = u[..., None] * x
    b = u[..., None] - a
    values = F(a) * G(b) + F(b) * G(a)
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise EvaluationError("non-finite convolution integrand", at=float(np.broadcast_to(a, values.shape)[bad][0]))
    return u * np.sum(values * w, axis=-1)


def conv_alpha(f, g, alpha, t, quad: QuadratureSpec = DEFAULT_QUAD, *, levels: int = 20, _inner: bool = False):
    """Fractional convolution ``(f *_alpha g)(t)`` for scalar or array ``t``.

    ``levels`` is the number of geometric panels toward each end of
    ``[0, u]``; raise it when a factor is sharply peaked near ``u = 0``.
    """
    alpha = as_order(alpha)
    f, g = as_time_function(f), as_time_function(g)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("convolution is evaluated at t >= 0")
    u = to_u(t_arr, alpha)

    def F(y):
        return f(from_u(y, alpha))

    def G(y):
        return g(from_u(y, alpha))

    if quad.scheme == "adaptive-simpson" and not _inner:
        vals = [adaptive_simpson(lambda y, ui=float(ui): F(y) * G(ui - y), 0.0, float(ui), tol=quad.tol)
                if ui > 0 else 0.0 for ui in np.ravel(u)]
        out = np.asarray(vals, dtype=float).reshape(t_arr.shape)
    elif _inner:
        out = _classical_conv(F, G, u, INNER_PANEL_NODES, INNER_LEVELS)
    else:
        out = _classical_conv(F, G, u, quad.panel_nodes, levels)
    return out if t_arr.ndim else out[()]


def conv_function(f, g, alpha, quad: QuadratureSpec = DEFAULT_QUAD, inner: bool = False) -> TimeFunction:
    """``f *_alpha g`` as a :class:`TimeFunction` with an inherited growth bound."""
    f, g = as_time_function(f), as_time_function(g)
    bound = None
    if f.growth_bound is not None and g.growth_bound is not None:
        # |f * g|(u) <= M1 M2 u exp(max(a1, a2) u) <= M1 M2 / (e d) exp((max + d) u)
        d = 1e-3
        bound = (f.growth_bound[0] * g.growth_bound[0] / (math.e * d),
                 max(f.growth_bound[1], g.growth_bound[1]) + d)
    return TimeFunction(lambda t: conv_alpha(f, g, alpha, t, quad, _inner=inner), growth_bound=bound)


# ---------------------------------------------------------------------------
# weighted norms


@dataclass(frozen=True)
class WeightedNormSpec:
    """Exponent ``n``, order ``alpha`` and truncation ``t_max`` of the norm
    ``(integral_0^t_max |f|**n t**(alpha-1) dt)**(1/n)``.

    The default ``t_max`` puts the truncation at ``u = 14 ln 10``, where
    ``exp(-u) < 1e-14``.
    """

    n: float = 1.0
    alpha: float = 1.0
    t_max: float | None = None

    def __post_init__(self):
        if not self.n >= 1:
            raise DomainError(f"norm exponent must be >= 1, got {self.n!r}")
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if self.t_max is not None and not self.t_max > 0:
            raise DomainError("t_max must be positive")

    @property
    def u_max(self) -> float:
        if self.t_max is None:
            return 14 * math.log(10)
        return float(to_u(self.t_max, self.alpha))

    def tail_estimate(self, f: TimeFunction) -> float:
        """Bound on the discarded ``integral_u_max^inf |f|**n du`` from a growth certificate."""
        if f.growth_bound is None or f.growth_bound[1] >= 0:
            return math.inf
        m, a = f.growth_bound
        return m**self.n * math.exp(self.n * a * self.u_max) / (self.n * -a)


def _norm_rule(u_max: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    width = max(min(1.0, u_max), u_max / 4096)
    return _interval_rule(0.0, u_max, n, "left", width, 30)


def weighted_norm(f, spec: WeightedNormSpec, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Weighted ``L^n_alpha`` norm on ``(0, t_max)``, integrated in ``u``."""
    f = as_time_function(f)
    u_max = spec.u_max
    if quad.scheme == "adaptive-simpson":
        total = integrate(lambda u: np.abs(f(from_u(u, spec.alpha))) ** spec.n, 0.0, u_max, quad)
    else:
        nodes, weights = _norm_rule(u_max, quad.panel_nodes)
        values = np.abs(f(from_u(nodes, spec.alpha))) ** spec.n
        bad = ~np.isfinite(values)
        if np.any(bad):
            raise EvaluationError("non-finite integrand in weighted norm",
                                  at=float(from_u(nodes[bad][0], spec.alpha)))
        total = float(np.sum(weights * values))
    if not math.isfinite(total):
        raise DivergenceError("weighted norm is infinite")
    tail = spec.tail_estimate(f)
    if math.isfinite(tail):
        log.debug("weighted norm truncation tail <= %.3e", tail)
    return total ** (1.0 / spec.n)


# ---------------------------------------------------------------------------
# checks


@dataclass
class InequalityReport:
    lhs: float
    rhs: float
    slack: float
    passed: bool

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "slack": self.slack, "pass": self.passed}


LAWS = ("commutativity", "associativity", "distributivity", "scalar")


def check_convolution_algebra(law: str, f, g, h=None, c: float = 1.0, alpha=1.0, t=1.0,
                              quad: QuadratureSpec = DEFAULT_QUAD) -> ComparisonReport:
    """Both sides of one algebraic law of ``*_alpha`` at time ``t``."""
    alpha = as_order(alpha)
    f, g = as_time_function(f), as_time_function(g)

    def conv(a, b, at=t):
        return conv_alpha(a, b, alpha, at, quad)

    if law == "commutativity":
        return ComparisonReport(law, conv(f, g), conv(g, f))
    if law == "distributivity":
        h = as_time_function(h if h is not None else 0.0)
        sum_gh = TimeFunction(lambda x: g(x) + h(x))
        parts = (conv(f, g), conv(f, h))
        return ComparisonReport(law, conv(f, sum_gh), parts[0] + parts[1], scale=abs(parts[0]) + abs(parts[1]))
    if law == "scalar":
        scaled = TimeFunction(lambda x: c * f(x))
        return ComparisonReport(law, conv(scaled, g), c * conv(f, g))
    if law == "associativity":
        h = as_time_function(h if h is not None else 1.0)
        left = conv_alpha(conv_function(f, g, alpha, quad, inner=True), h, alpha, t, quad)
        right = conv_alpha(f, conv_function(g, h, alpha, quad, inner=True), alpha, t, quad)
        outer = 2 * (20 + 1) * quad.panel_nodes
        inner = 2 * (INNER_LEVELS + 1) * INNER_PANEL_NODES
        return ComparisonReport(law, left, right, note=f"nested quadrature: {outer} outer x {inner} inner nodes")
    raise LookupFailure(f"unknown law {law!r}; known: {', '.join(LAWS)}")


def check_convolution_theorem(f, g, alpha, s: complex, quad: QuadratureSpec = DEFAULT_QUAD) -> ComparisonReport:
    """``L{f} L{g}`` against the transform of ``f *_alpha g``."""
    alpha = as_order(alpha)
    f, g = as_time_function(f), as_time_function(g)
    lhs = forward_transform(f, alpha, s, quad) * forward_transform(g, alpha, s, quad)
    rhs = forward_transform(conv_function(f, g, alpha, quad), alpha, s, quad)
    return ComparisonReport("convolution_theorem", lhs, rhs)


YOUNG_SLACK = 1e-6


def check_young(f, g, n: float, alpha, t_max: float | None = None,
                quad: QuadratureSpec = DEFAULT_QUAD) -> InequalityReport:
    """``||f *_alpha g||_n <= ||f||_1 ||g||_n`` on ``(0, t_max)``."""
    alpha = as_order(alpha)
    f, g = as_time_function(f), as_time_function(g)
    spec_n = WeightedNormSpec(n, alpha, t_max)
    spec_1 = WeightedNormSpec(1.0, alpha, t_max)
    rhs = weighted_norm(f, spec_1, quad) * weighted_norm(g, spec_n, quad)
    lhs = weighted_norm(conv_function(f, g, alpha, quad), spec_n, quad)
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        raise DivergenceError("a norm in the Young inequality is infinite; the inequality is vacuous")
    passed = lhs <= rhs * (1 + YOUNG_SLACK) + 1e-300
    return InequalityReport(float(lhs), float(rhs), float(rhs * (1 + YOUNG_SLACK) - lhs), bool(passed))


__all__ = [
    "conv_alpha",
    "conv_function",
    "weighted_norm",
    "WeightedNormSpec",
    "InequalityReport",
    "check_convolution_algebra",
    "check_convolution_theorem",
    "check_young",
]
