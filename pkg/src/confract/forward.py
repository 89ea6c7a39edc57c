"""Forward conformable Laplace transform and checks of its operational rules.

Every transform is computed in conformable time ``u = t**alpha / alpha``:

    L_alpha{f}(s) = integral_0^inf exp(-s u) f(phi^{-1}(u)) du,

so the ``t**(alpha - 1)`` weight never appears and ``alpha = 1`` is the
classical transform by construction.  The ``check_*`` functions evaluate
both sides of an identity by independent quadratures and return a
:class:`ComparisonReport`.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .calculus import (
    TimeFunction,
    aitken_limit,
    as_order,
    as_time_function,
    conformable_derivative,
    conformable_integral,
    from_u,
    nth_conformable_derivative,
    richardson_limit,
    to_u,
)
from .errors import (
    BoundaryTermError,
    DivergenceError,
    DomainError,
    LookupFailure,
    TheoremInapplicableError,
)
from .quadrature import DEFAULT_QUAD, INNER_POWER, QuadratureSpec, graded_rule, laplace_integral

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# frequency-domain expressions


@dataclass(frozen=True)
class FrequencyExpression:
    """A transform ``F(s)``: a black-box evaluator or a ratio of real polynomials.

    Polynomial coefficients are highest degree first (``numpy.polyval``
    order).  ``region`` is the abscissa ``a`` such that ``F`` is declared
    valid for ``Re(s) > a``.
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    numer: tuple[float, ...] | None = None
    denom: tuple[float, ...] | None = None
    region: float = 0.0
    source: str | None = None

    @classmethod
    def rational(cls, numer: Sequence[float], denom: Sequence[float], source: str | None = None):
        num = np.trim_zeros(np.asarray(numer, dtype=float), "f")
        den = np.trim_zeros(np.asarray(denom, dtype=float), "f")
        if den.size == 0:
            raise DomainError("denominator polynomial is identically zero")
        if num.size == 0:
            num = np.zeros(1)
        scale = den[0]
        num, den = num / scale, den / scale
        region = float(np.max(np.roots(den).real)) if den.size > 1 else -math.inf

        def evaluate(s, num=num, den=den):
            return np.polyval(num, s) / np.polyval(den, s)

        return cls(evaluate, tuple(num), tuple(den), region, source)

    @classmethod
    def blackbox(cls, fn: Callable, region: float = 0.0, source: str | None = None):
        return cls(fn, None, None, float(region), source)

    @property
    def is_rational(self) -> bool:
        return self.numer is not None

    @property
    def strictly_proper(self) -> bool:
        return self.is_rational and len(self.numer) < len(self.denom)

    def __call__(self, s):
        s_arr = np.asarray(s, dtype=complex)
        out = np.asarray(self.evaluate(s_arr), dtype=complex)
        out = np.broadcast_to(out, s_arr.shape)
        return out if s_arr.ndim else complex(out[()])

    def check_consistency(self, rng: np.random.Generator | None = None, count: int = 5) -> bool:
        """Spot-check ``evaluate`` against the rational coefficients at random ``s``."""
        if not self.is_rational:
            return True
        rng = rng or np.random.default_rng(0)
        s = (self.region if math.isfinite(self.region) else 0.0) + 0.5 + rng.uniform(0, 5, count) \
            + 1j * rng.uniform(-5, 5, count)
        exact = np.polyval(self.numer, s) / np.polyval(self.denom, s)
        return bool(np.allclose(self(s), exact, rtol=1e-12, atol=0))


# ---------------------------------------------------------------------------
# the transform


def forward_transform(f, alpha, s: complex, quad: QuadratureSpec = DEFAULT_QUAD,
                      breakpoints: Sequence[float] = (), levels: int = 30,
                      inner_power: int = INNER_POWER) -> complex:
    """Conformable Laplace transform of ``f`` at ``s``.

    ``breakpoints`` are times where ``f`` jumps; quadrature panels are split
    there.  ``levels`` and ``inner_power`` are passed to the graded
    quadrature.  ``quad.t_max``, when set, truncates in ``u``.  Raises :class:`DivergenceError` when
    ``Re(s)`` does not exceed the growth rate certified by ``f.growth_bound``
    (or 0 without one).
    """
    alpha = as_order(alpha)
    f = as_time_function(f)
    s = complex(s)
    rate = f.growth_rate
    if s.real <= (rate if rate is not None else 0.0):
        raise DivergenceError(f"Re(s)={s.real:g} is outside the region of convergence "
                              f"(abscissa {rate if rate is not None else 0.0:g})")

    def h(u):
        return f(from_u(u, alpha))

    u_breaks = [float(to_u(b, alpha)) for b in breakpoints]
    value = laplace_integral(h, s, quad, breakpoints=u_breaks, growth_rate=rate, levels=levels,
                             inner_power=inner_power)
    if f.growth_bound is not None and quad.t_max is not None:
        log.debug("truncation tail bound at s=%s: %.3e", s, tail_bound(f, s, quad.t_max))
    return value


def tail_bound(f: TimeFunction, s: complex, u_max: float) -> float:
    """Bound on the discarded tail ``M exp((a - Re s) u_max) / (Re s - a)``."""
    if f.growth_bound is None:
        return math.inf
    m, a = f.growth_bound
    decay = complex(s).real - a
    return m * math.exp(-decay * u_max) / decay if decay > 0 else math.inf


def transform_converges(f, alpha, s: complex, t_max: float, quad: QuadratureSpec = DEFAULT_QUAD,
                        rtol: float = 1e-6) -> bool:
    """Whether the transform truncated at time ``t_max`` is stable when ``t_max`` doubles."""
    alpha = as_order(alpha)
    vals = []
    for cut in (t_max, 2 * t_max):
        spec = QuadratureSpec(t_max=float(to_u(cut, alpha)), n_nodes=quad.n_nodes, scheme=quad.scheme, tol=quad.tol)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                vals.append(forward_transform(f, alpha, s, spec))
        except (DivergenceError, ArithmeticError, DomainError):
            return False
    a, b = vals
    return bool(np.isfinite(a) and np.isfinite(b) and abs(b - a) <= rtol * max(abs(a), abs(b), 1e-300))


# ---------------------------------------------------------------------------
# closed-form pairs

PAIR_FAMILIES = ("const", "exp_eigen", "sin_eigen", "cos_eigen", "power_alpha")


@dataclass(frozen=True)
class PairTableEntry:
    family: str
    params: dict
    time_form: TimeFunction
    freq_form: FrequencyExpression


def pair_lookup(family: str, params: dict | None = None, alpha=1.0) -> tuple[TimeFunction, FrequencyExpression]:
    """Closed-form time function and transform for a table family.

    The sine and cosine entries use the classical-consistent factors:
    ``sin(lam u) <-> lam / (s^2 + lam^2)`` and ``cos(lam u) <-> s / (s^2 + lam^2)``.
    """
    entry = pair_entry(family, params, alpha)
    return entry.time_form, entry.freq_form


def pair_entry(family: str, params: dict | None = None, alpha=1.0) -> PairTableEntry:
    alpha = as_order(alpha)
    params = dict(params or {})
    if family == "const":
        f = TimeFunction(lambda t: np.ones_like(t), "1", (1.0, 0.0))
        F = FrequencyExpression.rational([1.0], [1.0, 0.0], "1/s")
    elif family == "exp_eigen":
        lam = float(params["lam"])
        f = TimeFunction(lambda t: np.exp(lam * to_u(t, alpha)), f"exp({lam!r}*u)", (1.0, lam))
        F = FrequencyExpression.rational([1.0], [1.0, -lam], f"1/(s-({lam!r}))")
    elif family == "sin_eigen":
        lam = float(params["lam"])
        f = TimeFunction(lambda t: np.sin(lam * to_u(t, alpha)), f"sin({lam!r}*u)", (1.0, 0.0))
        F = FrequencyExpression.rational([lam], [1.0, 0.0, lam * lam], f"{lam!r}/(s^2+{lam * lam!r})")
    elif family == "cos_eigen":
        lam = float(params["lam"])
        f = TimeFunction(lambda t: np.cos(lam * to_u(t, alpha)), f"cos({lam!r}*u)", (1.0, 0.0))
        F = FrequencyExpression.rational([1.0, 0.0], [1.0, 0.0, lam * lam], f"s/(s^2+{lam * lam!r})")
    elif family == "power_alpha":
        k = int(params.get("k", 1))
        if k < 0:
            raise LookupFailure(f"power_alpha needs k >= 0, got {k}")
        f = TimeFunction(lambda t: to_u(t, alpha) ** k, f"u^{k}")
        den = np.zeros(k + 2)
        den[0] = 1.0
        F = FrequencyExpression.rational([float(math.factorial(k))], den, f"{math.factorial(k)}/s^{k + 1}")
    else:
        raise LookupFailure(f"unknown pair family {family!r}; known: {', '.join(PAIR_FAMILIES)}")
    return PairTableEntry(family, params, f, F)


def pair_table(alpha=1.0, lam: float = 1.0, k: int = 1) -> list[PairTableEntry]:
    return [pair_entry(fam, {"lam": lam, "k": k}, alpha) for fam in PAIR_FAMILIES]


# ---------------------------------------------------------------------------
# identity checks


@dataclass
class ComparisonReport:
    """Both sides of an identity.  ``rel_err`` is relative to ``scale``,
    which defaults to the larger side."""

    name: str
    lhs: complex
    rhs: complex
    abs_err: float = field(init=False)
    rel_err: float = field(init=False)
    scale: float | None = None
    note: str = ""

    def __post_init__(self):
        self.abs_err = float(abs(complex(self.lhs) - complex(self.rhs)))
        scale = max(abs(complex(self.lhs)), abs(complex(self.rhs)), self.scale or 0.0)
        self.rel_err = self.abs_err / scale if scale > 0 else (0.0 if self.abs_err == 0 else math.inf)

    def passed(self, tol: float) -> bool:
        return self.rel_err <= tol

    def as_dict(self, tol: float) -> dict:
        out = {"name": self.name}
        for key in ("lhs", "rhs"):
            z = complex(getattr(self, key))
            out[key] = z.real
            if z.imag:
                out[key + "_imag"] = z.imag
        out.update(abs_err=self.abs_err, rel_err=self.rel_err, tol=tol, **{"pass": self.passed(tol)})
        return out


def _times_power(f: TimeFunction, power: float) -> TimeFunction:
    if power == 0:
        return f
    return TimeFunction(lambda t: np.power(t, power) * f(t), growth_bound=f.growth_bound)


def _growth_like(f: TimeFunction, evaluate) -> TimeFunction:
    return TimeFunction(evaluate, growth_bound=f.growth_bound)


PROPERTIES = ("linearity", "scaling", "first_shift", "second_shift", "mul_t_alpha", "div_t_alpha")


def check_property(property_id: str, f, alpha, s: complex, quad: QuadratureSpec = DEFAULT_QUAD,
                   a: float = 1.0, g=None, coeffs: tuple[float, float] = (1.0, 1.0)) -> ComparisonReport:
    """Check one elementary transform property at ``s``.

    ``a`` is the parameter of scaling and the shifts; ``g`` and ``coeffs``
    are the second function and weights for linearity.
    """
    alpha = as_order(alpha)
    f = as_time_function(f)
    s = complex(s)

    def L(func, at=s, **kw):
        return forward_transform(func, alpha, at, quad, **kw)

    if property_id == "linearity":
        g = as_time_function(g if g is not None else 1.0)
        c1, c2 = coeffs
        rates = [r for r in (f.growth_rate, g.growth_rate) if r is not None]
        combo = TimeFunction(lambda t: c1 * f(t) + c2 * g(t),
                             growth_bound=(1.0, max(rates)) if len(rates) == 2 else None)
        parts = (c1 * L(f), c2 * L(g))
        return ComparisonReport("linearity", L(combo), sum(parts), scale=sum(abs(p) for p in parts))
    if property_id == "scaling":
        if not a > 0:
            raise DomainError("scaling needs a > 0")
        scaled = _growth_like(f, lambda t: f(a * t))
        if f.growth_bound is not None:
            scaled = TimeFunction(scaled.evaluate, growth_bound=(f.growth_bound[0], f.growth_bound[1] * a**alpha))
        return ComparisonReport("scaling", L(scaled), L(f, at=s / a**alpha) / a**alpha)
    if property_id == "first_shift":
        shifted = TimeFunction(lambda t: np.exp(a * to_u(t, alpha)) * f(t),
                               growth_bound=None if f.growth_rate is None else (f.growth_bound[0], f.growth_rate + a))
        return ComparisonReport("first_shift", L(shifted), L(f, at=s - a))
    if property_id == "second_shift":
        if a < 0:
            raise DomainError("second shift needs a >= 0")

        def delayed(t):
            inner = np.clip(np.power(t, alpha) - a**alpha, 0.0, None) ** (1.0 / alpha)
            return np.where(t > a, f(inner), 0.0)

        lhs = L(_growth_like(f, delayed), breakpoints=[a] if a > 0 else [])
        return ComparisonReport("second_shift", lhs, np.exp(-s * a**alpha / alpha) * L(f))
    if property_id == "mul_t_alpha":
        lhs = L(_times_power(f, alpha))
        return ComparisonReport("mul_t_alpha", lhs, -alpha * transform_derivative(f, alpha, s, quad))
    if property_id == "div_t_alpha":
        lhs = L(_times_power(f, -alpha))
        return ComparisonReport("div_t_alpha", lhs, integrate_transform_to_infinity(f, alpha, s, quad) / alpha)
    raise LookupFailure(f"unknown property {property_id!r}; known: {', '.join(PROPERTIES)}")


def transform_derivative(f, alpha, s: complex, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """``dF/ds``: complex step for real ``s``, central differences otherwise."""
    s = complex(s)
    if s.imag == 0.0:
        step = 1e-20
        return forward_transform(f, alpha, s + 1j * step, quad).imag / step
    step = 1e-6 * abs(s)
    return (forward_transform(f, alpha, s + step, quad) - forward_transform(f, alpha, s - step, quad)) / (2 * step)


def integrate_transform_to_infinity(f, alpha, s: complex, quad: QuadratureSpec = DEFAULT_QUAD) -> complex:
    """``integral_s^inf F(sigma) d sigma`` along the ray through ``s``.

    Uses ``sigma = s / w`` with ``w`` in (0, 1], which maps the infinite ray
    onto a finite interval; no truncation is needed.
    """
    s = complex(s)
    x, w = graded_rule(quad.panel_nodes, 20)
    values = np.array([forward_transform(f, alpha, s / xi, quad) for xi in x])
    return complex(np.sum(w * values * s / x**2))


def _limit_at_zero(func_of_u: Callable[[np.ndarray], np.ndarray]) -> complex:
    samples = func_of_u(np.array([1e-6, 1e-7, 1e-8]))
    try:
        return aitken_limit(samples)[0]
    except ArithmeticError as exc:  # pragma: no cover - aitken raises EvaluationError
        raise BoundaryTermError(str(exc)) from exc
    except DomainError as exc:
        raise BoundaryTermError(f"boundary term has no finite limit at t=0+: {exc}") from exc


def _limit_at_infinity(func_of_u, s: complex, certified: bool) -> complex:
    if certified:
        return 0.0
    decay = max(complex(s).real, 1e-3)
    with np.errstate(all="ignore"):
        probe = np.abs(func_of_u(np.array([60.0, 120.0]) / decay))
    if np.all(np.isfinite(probe)) and probe[1] <= max(probe[0], 1e-12) and probe[1] < 1e-10:
        return 0.0
    raise BoundaryTermError("boundary term does not vanish as t -> infinity")


def boundary_bracket(f: TimeFunction, power: float, alpha: float, s: complex) -> complex:
    """``[exp(-s t^alpha/alpha) t^power f(t)]`` from 0+ to infinity."""

    def term(u):
        t = from_u(u, alpha)
        with np.errstate(all="ignore"):
            return np.exp(-s * u) * np.power(t, power) * f(t)

    rate = f.growth_rate
    certified = rate is not None and complex(s).real > rate
    return _limit_at_infinity(term, s, certified) - _limit_at_zero(term)


# A difference quotient at small u carries a relative error ~ eps / u**n no
# matter the step, so transforms of differenced functions stop the grading
# early: 1e-7 of the first panel for one difference, 1e-3 for two nested
# (which also leave the innermost panel unmapped).
DIFFERENCED_LEVELS = {1: 12, 2: 5}


def _derivative_of(f: TimeFunction, beta: float) -> TimeFunction:
    return TimeFunction(lambda t: conformable_derivative(f, beta, t), growth_bound=f.growth_bound)


def _weighted_transform(f, power, alpha, s, quad, coeff=1.0):
    if coeff == 0:
        return 0.0
    return coeff * forward_transform(_times_power(f, power), alpha, s, quad)


def derivative_transform_check(f, alpha, beta, s: complex, quad: QuadratureSpec = DEFAULT_QUAD) -> ComparisonReport:
    """Transform of ``T_beta f`` against the integration-by-parts formula.

    rhs = [e^{-su} t^{alpha-beta} f]_0^inf + s L{t^{alpha-beta} f} + (beta-alpha) L{t^{-beta} f}.
    """
    alpha, beta = as_order(alpha), as_order(beta)
    f = as_time_function(f)
    s = complex(s)
    lhs = forward_transform(_derivative_of(f, beta), alpha, s, quad, levels=DIFFERENCED_LEVELS[1])
    bracket = boundary_bracket(f, alpha - beta, alpha, s)
    terms = [bracket,
             _weighted_transform(f, alpha - beta, alpha, s, quad, s),
             _weighted_transform(f, -beta, alpha, s, quad, beta - alpha)]
    return ComparisonReport("derivative_rule", lhs, sum(terms), scale=sum(abs(x) for x in terms),
                            note=f"boundary bracket {complex(bracket):.6g}")


def nth_derivative_transform_check(f, alpha, beta, n: int, s: complex, quad: QuadratureSpec = DEFAULT_QUAD,
                                   formula: str = "derived") -> ComparisonReport:
    """Transform of ``(T_beta)^n f`` for ``n`` in {1, 2}.

    ``formula="derived"`` uses the coefficients that integration by parts
    actually produces for n = 2:

        s^2 L{t^{2(a-b)} f} + 3(b-a) s L{t^{a-2b} f} + (b-a)(2b-a) L{t^{-2b} f}
        + [e^{-su} t^{a-b} T_b f] + s [e^{-su} t^{2(a-b)} f] + (b-a) [e^{-su} t^{a-2b} f].

    ``formula="binomial"`` uses ``C(n,k) (b-a)^k`` coefficients instead;
    the two agree only when ``alpha == beta``.
    """
    if n == 1:
        return derivative_transform_check(f, alpha, beta, s, quad)
    if n != 2:
        raise DomainError(f"n-th derivative rule is checked for n in {{1, 2}}, got {n!r}")
    alpha, beta = as_order(alpha), as_order(beta)
    f = as_time_function(f)
    s = complex(s)
    d = beta - alpha
    first = _derivative_of(f, beta)
    second = TimeFunction(lambda t: nth_conformable_derivative(f, beta, 2, t), growth_bound=f.growth_bound)
    lhs = forward_transform(second, alpha, s, quad, levels=DIFFERENCED_LEVELS[2], inner_power=1)
    if formula == "derived":
        c1, c2 = 3 * d, d * (2 * beta - alpha)
    elif formula == "binomial":
        c1, c2 = 2 * d, d * d
    else:
        raise LookupFailure(f"unknown formula {formula!r}")
    brackets = [boundary_bracket(first, alpha - beta, alpha, s),
                s * boundary_bracket(f, 2 * (alpha - beta), alpha, s),
                d * boundary_bracket(f, alpha - 2 * beta, alpha, s) if d else 0.0]
    terms = brackets + [
        _weighted_transform(f, 2 * (alpha - beta), alpha, s, quad, s * s),
        _weighted_transform(f, alpha - 2 * beta, alpha, s, quad, c1 * s),
        _weighted_transform(f, -2 * beta, alpha, s, quad, c2),
    ]
    return ComparisonReport(f"second_derivative_rule[{formula}]", lhs, sum(terms),
                            scale=sum(abs(x) for x in terms))


def integral_transform_check(f, alpha, beta, s: complex, quad: QuadratureSpec = DEFAULT_QUAD,
                             formula: str = "derived") -> ComparisonReport:
    """Transform of ``g(t) = integral_0^t f(p) p^(beta-1) dp`` against ``L{t^(beta-alpha) f} / s``.

    Writing ``p^(beta-1) = p^(alpha-1) p^(beta-alpha)`` gives the exponent
    ``beta - alpha``.  ``formula="reversed"`` uses ``alpha - beta`` instead;
    the two coincide when ``alpha == beta``.
    """
    alpha, beta = as_order(alpha), as_order(beta)
    f = as_time_function(f)
    s = complex(s)
    if formula == "derived":
        power = beta - alpha
    elif formula == "reversed":
        power = alpha - beta
    else:
        raise LookupFailure(f"unknown formula {formula!r}")
    rate = f.growth_rate
    g = TimeFunction(lambda t: conformable_integral(f, beta, t, quad),
                     growth_bound=None if rate is None else (1.0, max(rate, 0.0) + 1e-9))
    lhs = forward_transform(g, alpha, s, quad)
    rhs = forward_transform(_times_power(f, power), alpha, s, quad) / s
    return ComparisonReport(f"integral_rule[{formula}]", lhs, rhs)


# ---------------------------------------------------------------------------
# limit theorems


def initial_value(F: FrequencyExpression) -> float:
    """``lim_{s -> inf} s F(s)``, which equals ``f(0+)``."""
    if F.is_rational:
        dn, dd = len(F.numer) - 1, len(F.denom) - 1
        if F.numer == (0.0,) or dn < dd - 1:
            return 0.0
        if dn == dd - 1:
            return F.numer[0] / F.denom[0]
        raise TheoremInapplicableError("s F(s) is unbounded as s -> infinity")
    xs = 1e-3 * 0.5 ** np.arange(4)
    samples = [complex(F(1.0 / x)) / x for x in xs]
    return _realify(richardson_limit(samples, 2.0, 1)[0])


def final_value(F: FrequencyExpression) -> float:
    """``lim_{s -> 0+} s F(s)``, which equals ``lim_{t -> inf} f(t)`` when the poles allow."""
    if F.is_rational:
        den = np.asarray(F.denom)
        num = np.asarray(F.numer)
        at_zero = 0
        while den.size > 1 and den[-1] == 0.0:
            den = den[:-1]
            at_zero += 1
        if at_zero > 1:
            raise TheoremInapplicableError("final value theorem needs at most a simple pole at s = 0")
        roots = np.roots(den) if den.size > 1 else np.array([])
        if np.any(roots.real >= 0):
            raise TheoremInapplicableError(f"poles in the closed right half-plane: {roots[roots.real >= 0]}")
        if at_zero == 0:
            return 0.0
        return float(np.polyval(num, 0.0) / den[-1])
    xs = 1e-3 * 0.5 ** np.arange(4)
    samples = [x * complex(F(x)) for x in xs]
    return _realify(richardson_limit(samples, 2.0, 1)[0])


def _realify(z):
    z = complex(z)
    return z.real if abs(z.imag) <= 1e-12 * max(abs(z), 1e-300) else z
