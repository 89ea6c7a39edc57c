"""Inverse conformable Laplace transform.

Every route inverts classically in ``u = t**alpha / alpha`` and then reads
the result at that ``u``:

* ``pair_table`` recognises the closed-form families,
* ``bromwich`` sums the complex inversion integral on a vertical line,
* ``residues`` sums residues of ``exp(s u) F(s)`` for strictly proper
  rational ``F``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import sici

from .calculus import as_order, to_u
from .errors import (
    AccuracyError,
    ContourParameterError,
    DomainError,
    IllConditionedPolesError,
    InconsistentPolesError,
    LookupFailure,
)
from .forward import FrequencyExpression

log = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# poles and partial fractions


@dataclass(frozen=True)
class Pole:
    """``coeffs[j]`` multiplies ``1 / (s - location)**(j + 1)``."""

    location: complex
    multiplicity: int
    coeffs: tuple[complex, ...]

    def __post_init__(self):
        if self.multiplicity < 1 or len(self.coeffs) != self.multiplicity:
            raise DomainError(f"pole at {self.location} needs {self.multiplicity} coefficients, "
                              f"got {len(self.coeffs)}")


@dataclass(frozen=True)
class PoleSet:
    poles: tuple[Pole, ...]

    def __post_init__(self):
        locs = [complex(p.location) for p in self.poles]
        for i, a in enumerate(locs):
            for b in locs[i + 1:]:
                if a == b:
                    raise InconsistentPolesError(f"pole {a} listed twice")

    @classmethod
    def simple(cls, residues: dict) -> "PoleSet":
        """Simple poles from ``{location: residue}``."""
        return cls(tuple(Pole(complex(z), 1, (complex(r),)) for z, r in residues.items()))

    def __call__(self, s):
        """Evaluate the partial-fraction sum at ``s``."""
        s = np.asarray(s, dtype=complex)
        total = np.zeros(s.shape, dtype=complex)
        for p in self.poles:
            for j, r in enumerate(p.coeffs):
                total = total + r / (s - p.location) ** (j + 1)
        return total

    def max_real(self) -> float:
        return max((complex(p.location).real for p in self.poles), default=-math.inf)


def _newton(poly: np.ndarray, z: complex, steps: int = 2) -> complex:
    dpoly = np.polyder(poly)
    for _ in range(steps):
        d = np.polyval(dpoly, z)
        if d == 0:
            break
        step = np.polyval(poly, z) / d
        if not abs(step) < 1e-3 * max(1.0, abs(z)):
            break
        z = z - step
    return z


def _find_roots(den: np.ndarray) -> np.ndarray:
    deg = den.size - 1
    if deg == 1:
        return np.array([-den[1] / den[0]], dtype=complex)
    if deg == 2:
        a, b, c = (complex(x) for x in den)
        disc = np.sqrt(b * b - 4 * a * c)
        # pick the sign that avoids cancellation
        q = -0.5 * (b + disc if (b.conjugate() * disc).real >= 0 else b - disc)
        if q == 0:
            return np.zeros(2, dtype=complex)
        return np.array([q / a, c / q], dtype=complex)
    return np.roots(den).astype(complex)


# eigenvalue solvers split a root of multiplicity m by about eps**(1/m),
# i.e. 1e-4 for m = 4; roots closer than this are merged or rejected
CLUSTER_RADIUS = 1e-3


def _cluster(roots: np.ndarray, scale: float) -> list[list[complex]]:
    groups: list[list[complex]] = []
    for z in sorted(roots, key=lambda w: (w.real, w.imag)):
        for g in groups:
            if min(abs(z - w) for w in g) < CLUSTER_RADIUS * scale:
                g.append(z)
                break
        else:
            groups.append([z])
    return groups


def _taylor(poly: np.ndarray, z: complex, count: int) -> np.ndarray:
    """First ``count`` Taylor coefficients of a polynomial at ``z``."""
    out = np.zeros(count, dtype=complex)
    p = np.asarray(poly, dtype=complex)
    fact = 1.0
    for j in range(count):
        out[j] = np.polyval(p, z) / fact if p.size else 0.0
        p = np.polyder(p) if p.size > 1 else np.zeros(0)
        fact *= j + 1
    return out


def _series_divide(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    for k in range(a.size):
        out[k] = (a[k] - np.dot(out[:k], b[k:0:-1])) / b[0]
    return out


def partial_fractions(F: FrequencyExpression, rng: np.random.Generator | None = None) -> PoleSet:
    """Poles and Laurent coefficients of a strictly proper rational ``F``.

    Roots closer than ``CLUSTER_RADIUS`` of the root scale are merged into one
    multiple pole when the denominator has a multiple root there to working
    precision, and kept as separate simple poles otherwise.  The result is
    checked by reconstructing ``F`` at 7 random points; a failed check on
    clustered roots raises :class:`IllConditionedPolesError`.
    """
    if not F.is_rational:
        raise DomainError("partial fractions need a rational expression")
    if not F.strictly_proper:
        raise DomainError("residue inversion needs deg(numerator) < deg(denominator)")
    num = np.asarray(F.numer, dtype=float)
    den = np.asarray(F.denom, dtype=float)
    roots = _find_roots(den)
    scale = max(1.0, float(np.max(np.abs(roots))))
    poles = []
    clustered = False
    for group in _cluster(roots, scale):
        m = len(group)
        clustered |= m > 1
        # a root of multiplicity m is a simple root of the (m-1)-th derivative
        z = complex(_newton(np.polyder(den, m - 1) if m > 1 else den, complex(np.mean(group))))
        if m > 1:
            ref = np.sum(np.abs(den)) * scale ** (den.size - 1)
            if np.any(np.abs(_taylor(den, z, m)) > 1e-9 * ref):
                # not a multiple root to working precision: keep the roots apart
                poles.extend(_pole(num, den, complex(_newton(den, complex(r))), 1, scale) for r in group)
                continue
        poles.append(_pole(num, den, z, m, scale))
    try:
        result = PoleSet(tuple(poles))
        _check_reconstruction(F, result, rng or np.random.default_rng(12345))
    except (AccuracyError, InconsistentPolesError) as exc:
        if clustered:
            raise IllConditionedPolesError(
                f"nearly coincident roots are neither separable nor a multiple root to working precision "
                f"({exc}); rescale s or merge them explicitly") from exc
        raise
    return result


def _pole(num: np.ndarray, den: np.ndarray, z: complex, m: int, scale: float) -> Pole:
    """Laurent coefficients of ``num / den`` at a root ``z`` of multiplicity ``m``."""
    if abs(z.imag) < 1e-14 * scale:
        z = complex(z.real, 0.0)
    q = np.polydiv(den.astype(complex), np.poly([z] * m))[0]
    h = _series_divide(_taylor(num, z, m), _taylor(q, z, m))
    return Pole(z, m, tuple(complex(h[m - 1 - j]) for j in range(m)))


def _check_reconstruction(F: FrequencyExpression, P: PoleSet, rng: np.random.Generator) -> None:
    s = P.max_real() + 1.0 + rng.uniform(0.5, 5.0, 7) + 1j * rng.uniform(-5.0, 5.0, 7)
    exact = F(s)
    approx = P(s)
    err = np.max(np.abs(approx - exact) / np.maximum(np.abs(exact), 1e-300))
    if not err <= 1e-9:
        raise AccuracyError("partial-fraction reconstruction does not reproduce F", residual=float(err))


def invert_residues(P, alpha, t):
    """Sum of residues of ``exp(s u) F(s)`` at ``u = t**alpha / alpha``.

    ``P`` is a :class:`PoleSet` or a rational :class:`FrequencyExpression`.
    A pole of multiplicity ``m`` contributes
    ``exp(z u) * sum_j coeffs[j] u**j / j!``.
    """
    alpha = as_order(alpha)
    if isinstance(P, FrequencyExpression):
        P = partial_fractions(P)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("inverse transform is evaluated at t >= 0")
    u = to_u(t_arr, alpha)
    total = np.zeros(u.shape, dtype=complex)
    magnitude = np.zeros(u.shape)
    for p in P.poles:
        poly = np.zeros(u.shape, dtype=complex)
        for j, r in enumerate(p.coeffs):
            poly = poly + r * u**j / math.factorial(j)
        term = np.exp(p.location * u) * poly
        total = total + term
        magnitude = magnitude + np.abs(term)
    bad = np.abs(total.imag) > 1e-12 * (np.abs(total) + magnitude)
    if np.any(bad):
        raise InconsistentPolesError("residues are not conjugate-symmetric: inverse has an imaginary part "
                                     f"{float(np.max(np.abs(total.imag[bad]))):.3e}")
    out = total.real
    return out if t_arr.ndim else float(out[()])


# ---------------------------------------------------------------------------
# Bromwich contour


@dataclass(frozen=True)
class BromwichSpec:
    """Line abscissa ``c``, half-length ``omega_max`` and node count of the
    trapezoid rule; ``None`` fields are chosen from ``F`` and ``u``."""

    c: float | None = None
    n_nodes: int | None = None
    omega_max: float | None = None

    def __post_init__(self):
        if self.n_nodes is not None and self.n_nodes < 64:
            raise DomainError(f"Bromwich rule needs n_nodes >= 64, got {self.n_nodes}")
        if self.omega_max is not None and not self.omega_max > 0:
            raise DomainError("omega_max must be positive")


# cap on nodes per side of the line so a tiny u cannot exhaust memory
_MAX_NODES = 400_000


def _abscissa(F: FrequencyExpression) -> float:
    if F.is_rational and len(F.denom) > 1:
        return float(np.max(_find_roots(np.asarray(F.denom)).real))
    return F.region if math.isfinite(F.region) else 0.0


def invert_bromwich(F: FrequencyExpression, alpha, t, spec: BromwichSpec = BromwichSpec()):
    """Complex inversion integral at ``u = t**alpha / alpha`` by the trapezoid rule.

    The integral runs along ``Re s = c``.  The node spacing sets the period of
    the aliasing error (``exp(-(c - a) T)`` for period ``T``).  The part of
    the line beyond ``omega_max`` is added analytically from a three-term
    asymptotic fit of ``F``, together with endpoint corrections for the
    truncated trapezoid sum.
    """
    alpha = as_order(alpha)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("Bromwich inversion is evaluated at t > 0")
    out = np.array([_bromwich_at(F, float(u), spec) for u in np.ravel(to_u(t_arr, alpha))])
    out = out.reshape(t_arr.shape)
    return out if t_arr.ndim else float(out[()])


def _bromwich_at(F: FrequencyExpression, u: float, spec: BromwichSpec) -> float:
    a0 = _abscissa(F)
    gap = 1.0 if u <= 1.0 else 1.0 / u
    c = a0 + gap if spec.c is None else float(spec.c)
    if c <= a0:
        raise ContourParameterError(f"abscissa c={c} must exceed the singularity abscissa {a0}")
    omega = 2000.0 / u if spec.omega_max is None else float(spec.omega_max)
    if spec.n_nodes is None:
        period = 40.0 / (c - a0)
        n = int(min(_MAX_NODES, math.ceil(omega * period / (2 * math.pi))))
    else:
        n = int(spec.n_nodes)
    w = np.linspace(0.0, omega, n + 1)
    dw = w[1] - w[0]
    s = c + 1j * w
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.exp(s * u) * F(s)
    if not np.all(np.isfinite(vals)):
        raise ContourParameterError(f"F is not finite on the line Re(s)={c}; choose a larger c")
    weights = np.full(n + 1, dw)
    weights[0] = weights[-1] = dw / 2
    # the two halves of the line are conjugates for real f; summing both keeps
    # the imaginary part as a diagnostic
    s_neg = np.conj(s)
    with np.errstate(over="ignore", invalid="ignore"):
        vals_neg = np.exp(s_neg * u) * F(s_neg)
    total = np.sum(weights * vals) + np.sum(weights * vals_neg)
    tail, endpoint = _tail_terms(F, c, omega, u, dw)
    tail = np.exp(c * u) * 2 * (tail - endpoint).real
    result = (total + tail) / (2 * math.pi)
    scale = abs(result.real)
    if abs(result.imag) > 1e-8 * max(scale, 1e-300) and abs(result.imag) > 1e-14:
        raise ContourParameterError(
            f"imaginary residue {result.imag:.3e} exceeds 1e-8 of the result {result.real:.6g}; "
            "increase omega_max or move c")
    return float(result.real)


def _tail_terms(F: FrequencyExpression, c: float, omega: float, u: float, dw: float) -> tuple[complex, complex]:
    """Tail integral beyond ``omega`` and the trapezoid endpoint error at ``omega``.

    ``F(c + i w)`` is modelled as ``sum_k b_k / (i w)**k`` (k = 1..3), fitted
    at ``w = omega, 0.8 omega, 0.6 omega``.  The tail is
    ``integral_omega^inf exp(i w u) F dw``; the endpoint term is the first two
    Euler-Maclaurin corrections ``dw**2/12 G1 - dw**4/720 G3`` where ``Gk`` is
    the k-th derivative of ``G = exp(i w u) F``.  Both omit the common factor
    ``exp(c u)``.
    """
    w = omega * np.array([1.0, 0.8, 0.6])
    x = 1.0 / (1j * w)
    basis = np.stack([x, x**2, x**3], axis=1)
    b = np.linalg.solve(basis, F(c + 1j * w))
    coeffs = {k: b[k - 1] * (1j) ** (-k) for k in range(1, 4)}  # of w**-k
    # I_k = integral_omega^inf exp(i w u) w**-k dw by the recurrence
    # I_{k+1} = (i u I_k + exp(i omega u) omega**-k) / k
    si, ci = sici(omega * u)
    ik = -ci + 1j * (math.pi / 2 - si)
    phase = np.exp(1j * omega * u)
    tail = 0.0
    for k in range(1, 4):
        tail += coeffs[k] * ik
        ik = (1j * u * ik + phase * omega ** (-k)) / k

    def derivative(cs):
        # d/dw of exp(i w u) sum c_j w**-j, as the new coefficients c_j
        out = {}
        for j, cj in cs.items():
            out[j] = out.get(j, 0.0) + 1j * u * cj
            out[j + 1] = out.get(j + 1, 0.0) - j * cj
        return out

    def value(cs):
        return phase * sum(cj * omega ** (-j) for j, cj in cs.items())

    d1 = derivative(coeffs)
    d3 = derivative(derivative(d1))
    endpoint = dw**2 / 12 * value(d1) - dw**4 / 720 * value(d3)
    return complex(tail), complex(endpoint)


# ---------------------------------------------------------------------------
# closed-form pairs


def _match_pair(F: FrequencyExpression):
    """Classical inverse of a pair-table shape as a function of ``u``."""
    if not F.is_rational:
        raise LookupFailure("pair-table inversion needs a rational expression")
    num = np.asarray(F.numer)
    den = np.asarray(F.denom)
    deg = den.size - 1
    if num.size == 1:
        c = num[0]
        if deg >= 1 and np.all(den[1:] == 0):
            k = deg - 1
            return lambda u: c * u**k / math.factorial(k)
        if deg == 1:
            lam = -den[1]
            return lambda u: c * np.exp(lam * u)
    if deg == 2 and den[1] == 0 and den[2] > 0 and num.size <= 2:
        lam = math.sqrt(den[2])
        b, c = (0.0, num[0]) if num.size == 1 else (num[0], num[1])
        return lambda u: b * np.cos(lam * u) + c / lam * np.sin(lam * u)
    raise LookupFailure(f"no pair-table entry matches {F.source or 'the given rational expression'}")


def invert_via_classical(F: FrequencyExpression, alpha, t, method: str = "pair_table",
                         spec: BromwichSpec = BromwichSpec()):
    """Classical inverse of ``F`` read at ``u = t**alpha / alpha``."""
    alpha = as_order(alpha)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise DomainError("inverse transform is evaluated at t >= 0")
    if method == "pair_table":
        inv = _match_pair(F)
        out = np.asarray(inv(to_u(t_arr, alpha)), dtype=float)
        return out if t_arr.ndim else float(out[()])
    if method == "bromwich":
        return invert_bromwich(F, alpha, t, spec)
    if method == "residues":
        return invert_residues(F, alpha, t)
    raise LookupFailure(f"unknown inversion method {method!r}")


INVERSION_METHODS: Sequence[str] = ("pair_table", "bromwich", "residues")
