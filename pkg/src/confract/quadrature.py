"""Quadrature rules shared by every integral in the package.

The default scheme ("transformed-gauss") is composite Gauss-Legendre on
panels that shrink geometrically toward the endpoints where algebraic
singularities of the form ``x**p`` (p > -1) live.  Such singularities are
what remains after the ``u = t**alpha / alpha`` substitution, and geometric
grading integrates them to near machine precision with a fixed node count.

"adaptive-simpson" is an independent scheme kept as a cross-check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import AccuracyError, DivergenceError, DomainError, EvaluationError

log = logging.getLogger(__name__)

SCHEMES = ("transformed-gauss", "adaptive-simpson")

# geometric ratio between consecutive graded panels
GRADING_RATIO = 0.25
# the panel touching a graded endpoint is mapped by x = eps * w**INNER_POWER, which
# turns an endpoint singularity x**p (p > -1) into the milder w**(INNER_POWER*(p+1)-1)
INNER_POWER = 8


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation point, node budget and scheme for an integral.

    ``t_max`` truncates improper integrals (in the integration variable of
    the caller); ``None`` lets the caller pick a truncation from the decay of
    the integrand.  ``n_nodes`` is the total budget of the graded rule, split
    into 32 panels.
    """

    t_max: float | None = None
    n_nodes: int = 512
    scheme: str = "transformed-gauss"
    tol: float = 1e-12

    def __post_init__(self):
        if self.t_max is not None and not self.t_max > 0:
            raise DomainError(f"t_max must be positive, got {self.t_max!r}")
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 8:
            raise DomainError(f"n_nodes must be an integer >= 8, got {self.n_nodes!r}")
        if self.scheme not in SCHEMES:
            raise DomainError(f"unknown quadrature scheme {self.scheme!r}; choose from {SCHEMES}")

    @property
    def panel_nodes(self) -> int:
        return max(8, self.n_nodes // 32)


DEFAULT_QUAD = QuadratureSpec()


@lru_cache(maxsize=None)
def _gauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    return (x + 1.0) / 2.0, w / 2.0


def _panel_rule(edges: Sequence[float], n: int) -> tuple[np.ndarray, np.ndarray]:
    x0, w0 = _gauss(n)
    edges = np.asarray(edges, dtype=float)
    lo, width = edges[:-1, None], np.diff(edges)[:, None]
    return (lo + width * x0).ravel(), (width * w0).ravel()


def _graded_edges(levels: int) -> np.ndarray:
    return np.concatenate(([0.0], GRADING_RATIO ** np.arange(levels, -1, -1.0)))


def _graded_left(levels: int, n: int, inner_power: int) -> tuple[np.ndarray, np.ndarray]:
    edges = _graded_edges(levels)
    x, w = _panel_rule(edges[1:], n)
    x0, w0 = _gauss(n)
    eps = edges[1]
    inner_x = eps * x0**inner_power
    inner_w = eps * inner_power * x0 ** (inner_power - 1) * w0
    return np.concatenate((inner_x, x)), np.concatenate((inner_w, w))


@lru_cache(maxsize=None)
def graded_rule(n: int, levels: int = 20, both: bool = False,
                inner_power: int = INNER_POWER) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1], graded toward 0 (and toward 1 if ``both``).

    ``inner_power=1`` leaves the innermost panel unmapped, for integrands
    that are unreliable very close to the endpoint.
    """
    x, w = _graded_left(levels, n, inner_power)
    if not both:
        nodes, weights = x, w
    else:
        # nodes within eps of 1 would round onto the endpoint, so the right half is not mapped
        xr, wr = _graded_left(levels, n, 1)
        nodes = np.concatenate((0.5 * x, 1.0 - 0.5 * xr[::-1]))
        weights = np.concatenate((0.5 * w, 0.5 * wr[::-1]))
    nodes.flags.writeable = False
    weights.flags.writeable = False
    return nodes, weights


def _check_finite(values: np.ndarray, points: np.ndarray, what: str = "integrand") -> None:
    bad = ~np.isfinite(values)
    if np.any(bad):
        raise EvaluationError(f"non-finite {what}", at=float(np.asarray(points)[bad].flat[0]))


def adaptive_simpson(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
                     tol: float = 1e-10, max_rounds: int = 48) -> complex | float:
    """Globally adaptive Simpson rule, refined breadth-first so each round is one vectorized call.

    Raises :class:`AccuracyError` carrying the residual error estimate when
    ``max_rounds`` bisections do not meet ``tol``.
    """
    if b == a:
        return 0.0
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    mid = 0.5 * (lo + hi)
    f = func(np.concatenate((lo, mid, hi)))
    flo, fmid, fhi = f[:1], f[1:2], f[2:3]
    whole = (hi - lo) / 6.0 * (flo + 4 * fmid + fhi)
    total = 0.0
    span = abs(b - a)
    for _ in range(max_rounds):
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        fv = func(np.concatenate((lm, rm)))
        _check_finite(fv, np.concatenate((lm, rm)))
        flm, frm = fv[: lo.size], fv[lo.size:]
        left = (mid - lo) / 6.0 * (flo + 4 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4 * frm + fhi)
        err = left + right - whole
        ok = np.abs(err) <= 15.0 * tol * np.abs(hi - lo) / span
        total = total + np.sum((left + right + err / 15.0)[ok])
        keep = ~ok
        if not np.any(keep):
            return total
        lo, mid, hi = (np.concatenate((lo[keep], mid[keep])), np.concatenate((lm[keep], rm[keep])),
                       np.concatenate((mid[keep], hi[keep])))
        flo, fmid, fhi = (np.concatenate((flo[keep], fmid[keep])), np.concatenate((flm[keep], frm[keep])),
                          np.concatenate((fmid[keep], fhi[keep])))
        whole = np.concatenate((left[keep], right[keep]))
        if lo.size > 2_000_000:
            break
    raise AccuracyError("adaptive Simpson did not converge", residual=float(np.sum(np.abs(err[keep]))))


def integrate(func: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              quad: QuadratureSpec = DEFAULT_QUAD, grade: str = "left",
              panel_width: float | None = None, levels: int = 30):
    """Integrate ``func`` (vectorized) over [a, b].

    ``grade`` is "left", "right", "both" or "none" and says where endpoint
    singularities are expected.  If ``panel_width`` is given, only the first
    ``panel_width`` of the interval is graded and the rest is covered with
    uniform panels no wider than ``panel_width``.
    """
    if b < a:
        raise DomainError(f"integration interval reversed: [{a}, {b}]")
    if b == a:
        return 0.0
    if quad.scheme == "adaptive-simpson":
        return adaptive_simpson(func, a, b, tol=quad.tol)
    nodes, weights = _interval_rule(a, b, quad.panel_nodes, grade, panel_width, levels)
    values = func(nodes)
    _check_finite(values, nodes)
    return np.sum(weights * values)


def _interval_rule(a, b, n, grade, panel_width, levels, inner_power=INNER_POWER):
    length = b - a
    if panel_width is None or panel_width >= length:
        if grade == "none":
            x, w = _panel_rule([0.0, 1.0], n)
        elif grade == "both":
            x, w = graded_rule(n, levels, both=True, inner_power=inner_power)
        else:
            x, w = graded_rule(n, levels, inner_power=inner_power)
            if grade == "right":
                x, w = 1.0 - x[::-1], w[::-1]
        return a + length * x, length * w
    gx, gw = graded_rule(n, levels, inner_power=inner_power)
    pieces_x = [a + panel_width * gx]
    pieces_w = [panel_width * gw]
    count = max(1, math.ceil((length - panel_width) / panel_width))
    edges = np.linspace(a + panel_width, b, count + 1)
    x, w = _panel_rule(edges, n)
    pieces_x.append(x)
    pieces_w.append(w)
    return np.concatenate(pieces_x), np.concatenate(pieces_w)


def laplace_integral(h: Callable[[np.ndarray], np.ndarray], s: complex,
                     quad: QuadratureSpec = DEFAULT_QUAD, breakpoints: Sequence[float] = (),
                     growth_rate: float | None = None, levels: int = 30,
                     inner_power: int = INNER_POWER) -> complex:
    """Classical Laplace integral of ``h`` over [0, inf), truncated.

    The truncation point is ``quad.t_max`` when given.  Otherwise it starts
    at 36 decay lengths and doubles until the integrand at the cut is below
    1e-17 of its peak; an integrand that keeps growing raises
    :class:`DivergenceError`.  ``levels`` is the number of geometric panels
    toward each cut; fewer levels and ``inner_power=1`` keep nodes away
    from 0 for integrands that are only accurate to a relative error there.
    """
    s = complex(s)
    decay = s.real - (growth_rate or 0.0)
    if decay <= 0:
        raise DivergenceError(f"Re(s)={s.real} does not exceed the growth rate {growth_rate or 0.0}")
    scale = 1.0 / max(abs(s), decay)

    def integrand(u):
        with np.errstate(over="ignore", invalid="ignore"):
            return np.exp(-s * u) * h(u)

    if quad.t_max is not None:
        upper = float(quad.t_max)
    else:
        upper = max(36.0 / decay, 36.0 * scale, *(2 * b for b in breakpoints)) if breakpoints else 36.0 / decay
        peak = None
        for _ in range(12):
            probe = np.array([0.5 * upper, upper])
            with np.errstate(over="ignore", invalid="ignore"):
                tail = np.abs(integrand(probe))
            if not np.all(np.isfinite(tail)):
                raise DivergenceError(f"integrand overflows at u={upper:.4g}; transform diverges at s={s}")
            if peak is None:
                grid = np.linspace(0.0, upper, 65)[1:]
                with np.errstate(over="ignore", invalid="ignore"):
                    peak = float(np.nanmax(np.abs(integrand(grid))))
            if tail[1] <= 1e-17 * max(peak, 1e-300) or tail[1] == 0.0:
                break
            if tail[1] > tail[0] and tail[1] > peak:
                raise DivergenceError(f"integrand grows without bound; transform diverges at s={s}")
            upper *= 2.0
        else:
            raise AccuracyError("could not find a truncation point for the Laplace integral",
                                residual=float(tail[1]))
    cuts = sorted({0.0, upper, *(float(b) for b in breakpoints if 0.0 < b < upper)})
    if quad.scheme == "adaptive-simpson":
        return complex(sum(adaptive_simpson(integrand, lo, hi, tol=quad.tol)
                           for lo, hi in zip(cuts[:-1], cuts[1:])))
    xs, ws = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = _interval_rule(lo, hi, quad.panel_nodes, "left", 2.0 * scale, levels, inner_power)
        xs.append(x)
        ws.append(w)
    nodes, weights = np.concatenate(xs), np.concatenate(ws)
    values = integrand(nodes)
    _check_finite(values, nodes)
    return complex(np.sum(weights * values))
