"""Conformable derivative and integral, and the types everything else is built on.

The conformable derivative of order ``alpha`` in (0, 1] of a differentiable
function is ``t**(1 - alpha) * f'(t)`` for ``t > 0``; at ``t = 0`` it is the
right-hand limit of that expression.  The map ``phi(t) = t**alpha / alpha``
("conformable time", called ``u`` throughout) turns every conformable
operation into its classical counterpart.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .errors import AccuracyError, DomainError, EvaluationError, UnsupportedOrderError
from .quadrature import DEFAULT_QUAD, QuadratureSpec, graded_rule, integrate

__all__ = [
    "FractionalOrder",
    "TimeFunction",
    "SubstitutionMap",
    "as_order",
    "as_time_function",
    "to_u",
    "from_u",
    "conformable_derivative",
    "conformable_integral",
    "nth_conformable_derivative",
    "aitken_limit",
    "richardson_limit",
]


@dataclass(frozen=True)
class FractionalOrder:
    alpha: float

    def __post_init__(self):
        a = float(self.alpha)
        if not (0.0 < a <= 1.0) or math.isnan(a):
            raise DomainError(f"fractional order must lie in (0, 1], got {self.alpha!r}")
        object.__setattr__(self, "alpha", a)

    def __float__(self) -> float:
        return self.alpha


OrderLike = Union[float, FractionalOrder]


def as_order(alpha: OrderLike) -> float:
    """Validate an order and return it as a float."""
    return FractionalOrder(float(alpha)).alpha


def to_u(t, alpha: float):
    """Conformable time ``t**alpha / alpha``."""
    return np.power(t, alpha) / alpha


def from_u(u, alpha: float):
    """Inverse of :func:`to_u`."""
    return np.power(alpha * np.asarray(u, dtype=float), 1.0 / alpha)


@dataclass(frozen=True)
class SubstitutionMap:
    """``forward(t) = (t - a)**alpha / alpha`` and its inverse."""

    alpha: float
    a: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if not self.a >= 0:
            raise DomainError(f"left endpoint must be >= 0, got {self.a!r}")

    def forward(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.a):
            raise DomainError(f"substitution map is defined for t >= {self.a}")
        return to_u(t - self.a, self.alpha)

    def inverse(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(u < 0):
            raise DomainError("inverse substitution is defined for u >= 0")
        return self.a + from_u(u, self.alpha)


@dataclass(frozen=True)
class TimeFunction:
    """A function of ``t >= 0``, evaluated on numpy arrays.

    ``growth_bound`` is an optional certificate ``(M, a)`` meaning
    ``|f(t)| <= M * exp(a * t**alpha / alpha)``.  Evaluators must be
    reentrant; the package calls them from pure functions only.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    source: str | None = None
    growth_bound: tuple[float, float] | None = field(default=None)

    def __call__(self, t):
        t_arr = np.asarray(t, dtype=float)
        with np.errstate(all="ignore"):
            value = np.asarray(self.evaluate(t_arr))
        if value.shape != t_arr.shape:
            value = np.broadcast_to(value, t_arr.shape).copy()
        return value if np.ndim(t) else value[()]

    def __repr__(self) -> str:
        return f"TimeFunction({self.source or self.evaluate!r})"

    @property
    def growth_rate(self) -> float | None:
        return None if self.growth_bound is None else float(self.growth_bound[1])

    def check_growth(self, alpha: float, t: Sequence[float]) -> bool:
        """Spot-check the growth certificate at the points ``t``."""
        if self.growth_bound is None:
            return True
        m, a = self.growth_bound
        t = np.asarray(t, dtype=float)
        return bool(np.all(np.abs(self(t)) <= m * np.exp(a * to_u(t, alpha)) * (1 + 1e-12)))


def as_time_function(f) -> TimeFunction:
    if isinstance(f, TimeFunction):
        return f
    if callable(f):
        return TimeFunction(f)
    if np.isscalar(f):
        c = f
        return TimeFunction(lambda t: np.full(np.shape(t), c), source=repr(c))
    raise TypeError(f"cannot interpret {f!r} as a function of time")


def aitken_limit(samples: Sequence[complex]) -> tuple[complex, float]:
    """Limit of a sequence sampled at geometrically shrinking arguments.

    Exact for ``L + C * x**p`` with any ``p > 0`` (Richardson extrapolation
    with the exponent estimated from the data).  Returns ``(limit,
    error_estimate)``; raises :class:`EvaluationError` when the samples
    diverge.
    """
    g0, g1, g2 = (complex(v) for v in samples[-3:])
    d1, d2 = g1 - g0, g2 - g1
    scale = max(abs(g0), abs(g1), abs(g2), 1e-300)
    if abs(d2) <= 1e-14 * scale:
        return _real(g2), abs(d2)
    if abs(d1) == 0.0 or abs(d2) >= abs(d1):
        raise EvaluationError("limit does not exist: sampled values do not settle")
    limit = g2 - d2 * d2 / (d2 - d1)
    return _real(limit), abs(limit - g2)


def richardson_limit(samples: Sequence[complex], ratio: float = 2.0, order: int = 1) -> tuple[complex, float]:
    """Richardson extrapolation for samples at ``h, h/ratio, h/ratio**2, ...``.

    Assumes an error expansion in integer powers of ``h`` starting at
    ``order``.
    """
    table = [complex(v) for v in samples]
    err = math.inf
    p = order
    while len(table) > 1:
        factor = ratio**p
        new = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
        err = abs(new[-1] - table[-1])
        table = new
        p += 1
    return _real(table[0]), err


def _real(z: complex):
    return z.real if z.imag == 0.0 else z


def _relative_step(t: np.ndarray, alpha: float) -> np.ndarray:
    # near 0 the difference f(t+d) - f(t-d) is tiny next to f itself, so the
    # relative step is widened until round-off stops dominating
    return np.clip(np.cbrt(np.finfo(float).eps / np.power(t, alpha)), 1e-6, 1e-2)


def _check_stencil(values: np.ndarray, points: np.ndarray) -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise EvaluationError("non-finite function value in the difference stencil",
                              at=float(np.asarray(points)[bad].flat[0]))


def conformable_derivative(f, alpha: OrderLike, t, h: float | None = None):
    """Conformable derivative ``T_alpha f`` at ``t`` (scalar or array).

    For ``t > 0`` a second-order central difference of ``f'`` is scaled by
    ``t**(1 - alpha)``.  The default step is relative to ``t``: about
    ``1e-6 * t`` for ``t`` of order one, widened toward ``1e-2 * t`` as
    ``t**alpha`` shrinks.  It never exceeds ``t / 2``, so the stencil stays
    on ``t > 0``.  At ``t = 0`` the limit of
    ``t**(1 - alpha) * f'(t)`` is extrapolated from samples at ``h``,
    ``h / 2``, ``h / 4``.
    """
    alpha = as_order(alpha)
    f = as_time_function(f)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("conformable derivative requires t >= 0")
    out = np.empty(t_arr.shape, dtype=np.result_type(float, np.asarray(f(np.ones(1))).dtype))
    pos = t_arr > 0
    if np.any(pos):
        tp = t_arr[pos]
        step = _relative_step(tp, alpha) * tp if h is None else np.minimum(h, tp / 2)
        hi, lo = f(tp + step), f(tp - step)
        _check_stencil(hi, tp + step)
        _check_stencil(lo, tp - step)
        deriv = (hi - lo) / (2 * step)
        out[pos] = deriv if alpha == 1.0 else np.power(tp, 1 - alpha) * deriv
    if np.any(~pos):
        out[~pos] = _derivative_at_zero(f, alpha, 1e-6 if h is None else h)[0]
    return out if t_arr.ndim else out[()]


def _derivative_at_zero(f: TimeFunction, alpha: float, h: float):
    taus = h * np.array([1.0, 0.5, 0.25])
    step = _relative_step(taus, alpha) * taus
    hi, lo = f(taus + step), f(taus - step)
    _check_stencil(hi, taus + step)
    _check_stencil(lo, taus - step)
    samples = np.power(taus, 1 - alpha) * (hi - lo) / (2 * step)
    return aitken_limit(samples)


def conformable_derivative_at_zero(f, alpha: OrderLike, h: float = 1e-6) -> tuple[float, float]:
    """``T_alpha f(0)`` with an error estimate; the limit is not certified to exist."""
    return _derivative_at_zero(as_time_function(f), as_order(alpha), h)


MAX_NESTED_ORDER = 4


def nth_conformable_derivative(f, beta: OrderLike, n: int, t, h: float | None = None):
    """``(T_beta)**n f`` at ``t > 0`` by nesting :func:`conformable_derivative`.

    Nested differences amplify round-off like ``eps / h**n``; the default
    relative step ``eps**(1 / (n + 2))`` balances that against truncation
    for ``t`` of order one and widens as ``t**beta`` shrinks.
    """
    beta = as_order(beta)
    if int(n) != n or n < 1:
        raise DomainError(f"derivative count must be a positive integer, got {n!r}")
    if n > MAX_NESTED_ORDER:
        raise UnsupportedOrderError(f"nested conformable derivatives above order {MAX_NESTED_ORDER} are unsupported")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("nested conformable derivative requires t > 0")
    eps = np.finfo(float).eps
    # one relative step per outer point, shared by every nesting level
    rel = np.clip((eps / np.power(t_arr, n * beta)) ** (1.0 / (n + 2)), eps ** (1.0 / (n + 2)), 0.05)
    g = as_time_function(f)
    for _ in range(n):
        g = _derivative_function(g, beta, h, rel)
    return g(t)


def _derivative_function(g: TimeFunction, beta: float, h: float | None, rel) -> TimeFunction:
    def evaluate(tt):
        step = rel * tt if h is None else np.minimum(h, tt / 2)
        return np.power(tt, 1 - beta) * (g(tt + step) - g(tt - step)) / (2 * step)
    return TimeFunction(evaluate)


def conformable_integral(f, beta: OrderLike, t, quad: QuadratureSpec = DEFAULT_QUAD):
    """``g(t) = integral_0^t f(p) p**(beta - 1) dp`` for scalar or array ``t``.

    Integrates in ``v = p**beta / beta`` where the weight disappears
    (``dv = p**(beta - 1) dp``), so the integrand is ``f((beta v)**(1/beta))``.
    """
    beta = as_order(beta)
    f = as_time_function(f)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("conformable integral requires t >= 0")
    v_end = to_u(t_arr, beta)
    if quad.scheme == "adaptive-simpson":
        vals = [integrate(lambda v: f(from_u(v, beta)), 0.0, float(v), quad) for v in np.ravel(v_end)]
        out = np.asarray(vals).reshape(t_arr.shape)
        return out if t_arr.ndim else out[()]
    x, w = graded_rule(quad.panel_nodes, 20)
    nodes = v_end[..., None] * x
    values = f(from_u(nodes, beta))
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise EvaluationError("non-finite integrand", at=float(from_u(nodes[bad].flat[0], beta)))
    out = v_end * np.sum(values * w, axis=-1)
    return out if t_arr.ndim else out[()]
