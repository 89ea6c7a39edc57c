"""Closed-form solutions of the conformable-time transport and diffusion problems.

All four problems are written in conformable time ``u = t**alpha / alpha``;
``alpha`` enters every solution through ``u`` only.

* ``first_order``: ``T_alpha u + x u_x = x`` with zero initial and inflow data,
  solved by ``x (1 - exp(-u))``.
* ``semi_infinite``: ``T_alpha u = kappa u_xx`` on ``x > 0`` with ``u(0, t) = f(t)``,
  evaluated either as a fractional convolution of ``f`` with the inverse
  transform of ``exp(-x sqrt(s / kappa))`` or as a similarity integral.
* ``finite_mixed``: the same equation on ``(0, a)`` with ``u(0, t) = U`` and
  ``u_x(a, t) = 0``, as a residue series over the poles
  ``s_n = -kappa ((2n - 1) pi / (2a))**2``.
* ``dirichlet_sine``: ``u(x, 0) = sin x`` on ``(0, pi)``, solved by ``sin x exp(-kappa u)``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calculus import TimeFunction, as_order, as_time_function, from_u, to_u
from .convolution import conv_alpha
from .errors import ConsistencyError, DomainError
from .quadrature import DEFAULT_QUAD, GRADING_RATIO, QuadratureSpec, graded_rule

KINDS = ("first_order", "semi_infinite", "finite_mixed", "dirichlet_sine")
ROUTES = ("convolution", "similarity", "both")
# deepest grading of the convolution route, reached near x = 1e-10 for u of order one
MAX_KERNEL_LEVELS = 40


class SeriesTruncationWarning(UserWarning):
    """The series ran out of terms before its tail fell below tolerance."""

    def __init__(self, message: str, last_term: float):
        self.last_term = last_term
        super().__init__(f"{message} (last term magnitude {last_term:.3e})")


@dataclass(frozen=True)
class SeriesSpec:
    """``n_terms`` caps the series; summation stops once the next term's
    bound drops below ``tail_tol``.  ``tail_tol = 0`` sums exactly
    ``n_terms`` terms without a truncation warning."""

    n_terms: int = 200
    tail_tol: float = 1e-12

    def __post_init__(self):
        if int(self.n_terms) != self.n_terms or self.n_terms < 1:
            raise DomainError(f"n_terms must be a positive integer, got {self.n_terms!r}")
        if not self.tail_tol >= 0:
            raise DomainError("tail_tol must be >= 0")


@dataclass(frozen=True)
class DiffusionProblem:
    kind: str
    alpha: float = 1.0
    kappa: float = 1.0
    a_len: float | None = None
    U: float | None = None
    boundary_f: TimeFunction | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown problem kind {self.kind!r}; known: {', '.join(KINDS)}")
        object.__setattr__(self, "alpha", as_order(self.alpha))
        if not self.kappa > 0:
            raise DomainError(f"diffusivity must be positive, got {self.kappa!r}")
        if self.kind == "finite_mixed":
            if self.a_len is None or not self.a_len > 0:
                raise DomainError("finite_mixed needs a positive domain length a_len")
            if self.U is None:
                raise DomainError("finite_mixed needs the boundary level U")
        if self.kind == "semi_infinite":
            if self.boundary_f is None:
                raise DomainError("semi_infinite needs the boundary function f")
            object.__setattr__(self, "boundary_f", as_time_function(self.boundary_f))

    @property
    def x_range(self) -> tuple[float, float]:
        if self.kind == "finite_mixed":
            return 0.0, float(self.a_len)
        if self.kind == "dirichlet_sine":
            return 0.0, math.pi
        return 0.0, math.inf

    def metadata(self) -> dict:
        meta = {"kind": self.kind, "alpha": self.alpha, "kappa": self.kappa}
        if self.a_len is not None:
            meta["a_len"] = self.a_len
        if self.U is not None:
            meta["U"] = self.U
        if self.boundary_f is not None:
            meta["boundary_f"] = self.boundary_f.source or "<callable>"
        return meta


# ---------------------------------------------------------------------------
# closed forms


def solve_first_order(x, t, alpha):
    """``x (1 - exp(-t**alpha / alpha))``."""
    alpha = as_order(alpha)
    return np.asarray(x, dtype=float) * -np.expm1(-to_u(np.asarray(t, dtype=float), alpha))


def solve_dirichlet_sine(x, t, alpha, kappa: float = 1.0):
    """``sin(x) exp(-kappa t**alpha / alpha)``; ``kappa = 1`` is the stated problem."""
    alpha = as_order(alpha)
    return np.sin(np.asarray(x, dtype=float)) * np.exp(-kappa * to_u(np.asarray(t, dtype=float), alpha))


def _kernel_u(x: float, kappa: float, w):
    """Inverse transform of ``exp(-x sqrt(s / kappa))`` at ``u = w``; 0 for ``w <= 0``."""
    w = np.asarray(w, dtype=float)
    safe = np.where(w > 0, w, 1.0)
    with np.errstate(over="ignore", under="ignore"):
        val = x / (2 * math.sqrt(math.pi * kappa)) * np.exp(-x * x / (4 * kappa * safe) - 1.5 * np.log(safe))
    return np.where(w > 0, val, 0.0)


def semi_infinite_kernel(x, t, alpha, kappa: float = 1.0):
    """``x / (2 sqrt(pi kappa)) u**(-3/2) exp(-x**2 / (4 kappa u))`` at ``u = t**alpha / alpha``."""
    alpha = as_order(alpha)
    x_arr, t_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if np.any(x_arr <= 0) or np.any(t_arr <= 0):
        raise DomainError("semi-infinite kernel needs x > 0 and t > 0")
    out = np.vectorize(lambda xi, ui: float(_kernel_u(xi, kappa, ui)))(x_arr, to_u(t_arr, alpha))
    return out if out.ndim else float(out)


def _kernel_levels(x: float, kappa: float, t: np.ndarray, alpha: float) -> int:
    # grade until the innermost panel is 1% of the kernel width x^2 / (4 kappa)
    ratio = 0.5 * float(np.max(to_u(t, alpha))) / (0.01 * x * x / (4 * kappa))
    return int(min(MAX_KERNEL_LEVELS, max(20, math.ceil(math.log(ratio) / math.log(1 / GRADING_RATIO)))))


# the similarity integrand is negligible where exp(-lam**2) < 1e-16
LAMBDA_MAX = math.sqrt(16 * math.log(10))


def _similarity(f: TimeFunction, x: float, u: np.ndarray, alpha: float, kappa: float,
                quad: QuadratureSpec) -> np.ndarray:
    # lower limit x / (2 sqrt(kappa u)) in log space, so tiny u cannot overflow
    with np.errstate(divide="ignore"):
        lam0 = np.exp(math.log(x) - math.log(2.0) - 0.5 * (math.log(kappa) + np.log(u)))
    out = np.zeros(u.shape)
    live = lam0 < LAMBDA_MAX
    if not np.any(live):
        return out
    l0 = lam0[live][:, None]
    ul = u[live][:, None]
    xg, wg = graded_rule(quad.panel_nodes, 20)
    span = LAMBDA_MAX - l0
    d = span * xg
    lam = l0 + d
    # u - x^2/(4 kappa lam^2) = u (lam - lam0)(lam + lam0) / lam^2, free of cancellation
    arg = ul * d * (lam + l0) / (lam * lam)
    values = f(from_u(arg, alpha)) * np.exp(-lam * lam)
    out[live] = 2 / math.sqrt(math.pi) * np.sum(values * wg * span, axis=-1)
    return out


def solve_semi_infinite(x, t, alpha, kappa: float, f, route: str = "convolution",
                        quad: QuadratureSpec = DEFAULT_QUAD):
    """Semi-infinite solution at scalar ``x`` and scalar or array ``t``.

    ``route`` is "convolution", "similarity", or "both"; "both" evaluates
    the two routes and raises :class:`ConsistencyError` when they differ by
    more than 1e-4 relative.  ``x = 0`` returns ``f(t)``; ``t = 0`` returns 0.
    """
    alpha = as_order(alpha)
    f = as_time_function(f)
    x = float(x)
    t_arr = np.asarray(t, dtype=float)
    if x < 0 or np.any(t_arr < 0):
        raise DomainError("semi-infinite solution needs x >= 0 and t >= 0")
    if route not in ROUTES:
        raise DomainError(f"unknown route {route!r}; known: {', '.join(ROUTES)}")
    flat = np.ravel(t_arr)
    out = np.zeros(flat.shape)
    pos = flat > 0
    if x == 0:
        out[pos] = f(flat[pos])
    elif np.any(pos):
        tp = flat[pos]
        if route in ("convolution", "both"):
            kernel = TimeFunction(lambda tt: _kernel_u(x, kappa, to_u(tt, alpha)))
            conv = np.asarray(conv_alpha(f, kernel, alpha, tp, quad, levels=_kernel_levels(x, kappa, tp, alpha)),
                              dtype=float)
        if route in ("similarity", "both"):
            sim = _similarity(f, x, to_u(tp, alpha), alpha, kappa, quad)
        if route == "both":
            gap = np.abs(conv - sim)
            bad = gap > 1e-4 * np.maximum(np.abs(conv), np.abs(sim)) + 1e-14
            if np.any(bad):
                i = int(np.argmax(bad))
                raise ConsistencyError(f"convolution and similarity routes disagree at x={x}, t={tp[i]}: "
                                       f"{float(conv[i])!r} vs {float(sim[i])!r}", residual=float(gap[i]))
            out[pos] = conv
        else:
            out[pos] = conv if route == "convolution" else sim
    out = out.reshape(t_arr.shape)
    return out if t_arr.ndim else float(out[()])


def solve_finite_mixed(x, t, alpha, kappa: float, a_len: float, U: float,
                       series: SeriesSpec = SeriesSpec()):
    """Residue series ``U [1 - (4/pi) sum sin(k_n x) / (2n-1) exp(-kappa k_n**2 u)]``
    with ``k_n = (2n - 1) pi / (2 a)``.

    ``x`` and ``t`` broadcast.  At ``t = 0`` the initial state is returned
    (``U`` at ``x = 0``, else 0).  A :class:`SeriesTruncationWarning` is issued
    when ``n_terms`` terms do not bring the tail below ``tail_tol``.
    """
    alpha = as_order(alpha)
    x_arr, t_arr = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(t, dtype=float))
    if np.any(x_arr < 0) or np.any(x_arr > a_len * (1 + 1e-12)) or np.any(t_arr < 0):
        raise DomainError(f"finite_mixed solution needs 0 <= x <= {a_len} and t >= 0")
    u = to_u(t_arr, alpha)
    live = u > 0
    u_min = float(np.min(u[live])) if np.any(live) else math.inf
    total = np.zeros(x_arr.shape)
    last = 0.0
    converged = series.tail_tol == 0
    for n in range(1, series.n_terms + 1):
        k = (2 * n - 1) * math.pi / (2 * a_len)
        decay = np.exp(-kappa * k * k * u)
        total += np.sin(k * x_arr) / (2 * n - 1) * decay
        if series.tail_tol > 0:
            k_next = (2 * n + 1) * math.pi / (2 * a_len)
            last = 4 / math.pi * abs(U) / (2 * n + 1) * math.exp(-kappa * k_next * k_next * u_min)
            if last < series.tail_tol:
                converged = True
                break
    if not converged:
        warnings.warn(SeriesTruncationWarning(
            f"finite_mixed series truncated at {series.n_terms} terms for t down to {from_u(u_min, alpha):.3g}",
            last), stacklevel=2)
    out = U * (1 - 4 / math.pi * total)
    initial = np.where(x_arr == 0, float(U), 0.0)
    out = np.where(live, out, initial)
    out = np.where(x_arr == 0, float(U), out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# fields


@dataclass
class SpaceTimeField:
    """``values[i, j] = u(x_grid[i], t_grid[j])``."""

    x_grid: np.ndarray
    t_grid: np.ndarray
    values: np.ndarray
    problem: DiffusionProblem | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float)
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        for name, grid in (("x", self.x_grid), ("t", self.t_grid)):
            if grid.ndim != 1 or grid.size < 1 or np.any(np.diff(grid) <= 0):
                raise DomainError(f"{name} grid must be a strictly increasing 1-D sequence")
        if self.values.shape != (self.x_grid.size, self.t_grid.size):
            raise DomainError(f"values shape {self.values.shape} does not match grids "
                              f"({self.x_grid.size}, {self.t_grid.size})")
        if not np.all(np.isfinite(self.values)):
            raise DomainError("field values must be finite")

    def metadata(self) -> dict:
        meta = dict(self.problem.metadata()) if self.problem is not None else {}
        meta.update(self.extra)
        return meta

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata().items():
            buf.write(f"# {key}: {_fmt(value)}\n")
        buf.write("x,t,u\n")
        for i, x in enumerate(self.x_grid):
            for j, t in enumerate(self.t_grid):
                buf.write(f"{x:.17g},{t:.17g},{self.values[i, j]:.17g}\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"problem": self.metadata(), "x_grid": self.x_grid.tolist(), "t_grid": self.t_grid.tolist(),
               "values": self.values.tolist()}
        return json.dumps(doc, indent=1, allow_nan=False)

    @classmethod
    def from_csv(cls, text: str) -> "SpaceTimeField":
        meta = {}
        rows = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                meta[key.strip()] = _parse_meta(value.strip())
            elif line.strip():
                rows.append(line)
        reader = csv.DictReader(rows)
        data = np.array([[float(r["x"]), float(r["t"]), float(r["u"])] for r in reader])
        if data.size == 0:
            raise DomainError("CSV field has no data rows")
        xs, ts = np.unique(data[:, 0]), np.unique(data[:, 1])
        values = np.full((xs.size, ts.size), np.nan)
        values[np.searchsorted(xs, data[:, 0]), np.searchsorted(ts, data[:, 1])] = data[:, 2]
        problem = None
        if meta.get("kind") in KINDS and meta["kind"] != "semi_infinite":
            problem = DiffusionProblem(meta["kind"], meta.get("alpha", 1.0), meta.get("kappa", 1.0),
                                       meta.get("a_len"), meta.get("U"))
        extra = {k: v for k, v in meta.items() if k not in {"kind", "alpha", "kappa", "a_len", "U"}}
        return cls(xs, ts, values, problem, extra)


def _fmt(value) -> str:
    return f"{value:.17g}" if isinstance(value, float) else str(value)


def _parse_meta(text: str):
    try:
        return float(text)
    except ValueError:
        return text


def evaluate_field(problem: DiffusionProblem, x_grid: Sequence[float], t_grid: Sequence[float],
                   series: SeriesSpec = SeriesSpec(), quad: QuadratureSpec = DEFAULT_QUAD,
                   route: str = "convolution") -> SpaceTimeField:
    """Closed-form solution of ``problem`` on the tensor grid."""
    x = np.asarray(x_grid, dtype=float)
    t = np.asarray(t_grid, dtype=float)
    lo, hi = problem.x_range
    if np.any(x < lo) or np.any(x > hi * (1 + 1e-12)):
        raise DomainError(f"x grid leaves the domain [{lo}, {hi}]")
    if np.any(t < 0):
        raise DomainError("t grid must be >= 0")
    X, T = np.meshgrid(x, t, indexing="ij")
    a = problem.alpha
    if problem.kind == "first_order":
        values = solve_first_order(X, T, a)
    elif problem.kind == "dirichlet_sine":
        values = solve_dirichlet_sine(X, T, a, problem.kappa)
    elif problem.kind == "finite_mixed":
        values = solve_finite_mixed(X, T, a, problem.kappa, problem.a_len, problem.U, series)
    else:
        values = np.array([solve_semi_infinite(xi, t, a, problem.kappa, problem.boundary_f, route, quad)
                           for xi in x]).reshape(x.size, t.size)
    return SpaceTimeField(x, t, values, problem)
