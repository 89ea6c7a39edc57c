"""Finite-difference solver for the conformable-time problems, independent of the closed forms.

Two time treatments are offered so that agreement between them is evidence:

* ``tau_substituted`` steps in ``tau = t**alpha / alpha``, where ``T_alpha``
  becomes ``d/dtau``, with Crank-Nicolson.  Steps near ``tau = 0`` are
  graded (at most 5% of the elapsed ``tau``) and the first four are
  backward Euler, which damps the oscillations non-smooth data excites.
* ``direct_graded`` steps ``u_t = t**(alpha-1) L u`` explicitly in ``t`` on the
  graded mesh ``t_k = T (k/K)**(1/alpha)``, with the coefficient taken at
  step midpoints and the explicit stability bound checked at every step.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .calculus import as_order, conformable_derivative, from_u, to_u
from .diffusion import DiffusionProblem, SpaceTimeField
from .errors import DomainError, EvaluationError, StabilityError

TIME_MAPPINGS = ("tau_substituted", "direct_graded")


@dataclass(frozen=True)
class FDGrid:
    """``x_nodes`` spatial nodes over the problem domain and ``t_nodes``
    output times over ``[0, t_end]``; each output interval is split into
    ``substeps`` steps (``None`` picks the fewest stable ones for the
    explicit mode and 1 for the implicit one)."""

    x_nodes: int
    t_nodes: int
    t_end: float
    time_mapping: str = "tau_substituted"
    substeps: int | None = None

    def __post_init__(self):
        if self.x_nodes < 3:
            raise DomainError("FD grid needs at least 3 spatial nodes")
        if self.t_nodes < 2:
            raise DomainError("FD grid needs at least 2 time nodes")
        if not self.t_end > 0:
            raise DomainError("t_end must be positive")
        if self.time_mapping not in TIME_MAPPINGS:
            raise DomainError(f"unknown time mapping {self.time_mapping!r}; known: {', '.join(TIME_MAPPINGS)}")
        if self.substeps is not None and self.substeps < 1:
            raise DomainError("substeps must be >= 1")

    def output_times(self, alpha: float) -> np.ndarray:
        k = np.arange(self.t_nodes) / (self.t_nodes - 1)
        if self.time_mapping == "tau_substituted":
            return from_u(k * to_u(self.t_end, alpha), alpha)
        return self.t_end * k ** (1.0 / alpha)


@dataclass
class FDReport:
    field: SpaceTimeField
    stability_margin: float
    max_abs_err: float | None = None
    steps: int = 0

    def to_json(self) -> str:
        doc = {
            "problem": self.field.metadata(),
            "stability_margin": self.stability_margin if math.isfinite(self.stability_margin) else None,
            "max_abs_err": self.max_abs_err,
            "steps": self.steps,
            "x_grid": self.field.x_grid.tolist(),
            "t_grid": self.field.t_grid.tolist(),
            "values": self.field.values.tolist(),
        }
        return json.dumps(doc, indent=1, allow_nan=False)


# ---------------------------------------------------------------------------
# tridiagonal algebra


def thomas(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a tridiagonal system; ``lower[0]`` and ``upper[-1]`` are ignored."""
    n = diag.size
    c = np.empty(n)
    d = np.empty(n)
    c[0] = upper[0] / diag[0]
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        m = diag[i] - lower[i] * c[i - 1]
        c[i] = upper[i] / m if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / m
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


class _Diffusion1D:
    """Unknowns, boundary handling and the discrete ``kappa d2/dx2`` for one problem."""

    def __init__(self, problem: DiffusionProblem, n: int):
        self.problem = problem
        lo, hi = problem.x_range
        self.x = np.linspace(lo, hi, n)
        self.dx = self.x[1] - self.x[0]
        self.k = problem.kappa / self.dx**2
        if problem.kind == "dirichlet_sine":
            self.initial = np.sin(self.x)
            self.initial[[0, -1]] = 0.0
            self.left, self.neumann = 0.0, False
        else:
            self.initial = np.zeros(n)
            self.initial[0] = problem.U
            self.left, self.neumann = float(problem.U), True

    def apply(self, v: np.ndarray) -> np.ndarray:
        """``kappa v_xx`` at the unknown nodes (all but x=0; x=a too when Dirichlet)."""
        out = np.zeros_like(v)
        out[1:-1] = self.k * (v[:-2] - 2 * v[1:-1] + v[2:])
        if self.neumann:
            # ghost node v[n] = v[n-2] enforces zero slope at x = a
            out[-1] = self.k * 2 * (v[-2] - v[-1])
        return out

    def implicit_step(self, v: np.ndarray, dtau: float, theta: float) -> np.ndarray:
        """theta-scheme step of ``v_tau = kappa v_xx``."""
        lo = 1
        hi = v.size if self.neumann else v.size - 1
        m = hi - lo
        r = theta * dtau * self.k
        explicit = v + (1 - theta) * dtau * self.apply(v)
        rhs = explicit[lo:hi].copy()
        lower = np.full(m, -r)
        diag = np.full(m, 1 + 2 * r)
        upper = np.full(m, -r)
        rhs[0] += r * self.left
        if self.neumann:
            lower[-1] = -2 * r
        out = v.copy()
        out[lo:hi] = thomas(lower, diag, upper, rhs)
        out[0] = self.left
        if not self.neumann:
            out[-1] = 0.0
        return out


def fd_solve_diffusion(problem: DiffusionProblem, grid: FDGrid,
                       reference: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> FDReport:
    """Finite-difference solve of a finite_mixed or dirichlet_sine problem.

    ``reference(X, T)`` (optional) is compared against the FD field and the
    maximum absolute difference recorded in the report.
    """
    if problem.kind not in ("finite_mixed", "dirichlet_sine"):
        raise DomainError(f"FD diffusion solver handles finite_mixed and dirichlet_sine, not {problem.kind}")
    alpha = problem.alpha
    op = _Diffusion1D(problem, grid.x_nodes)
    times = grid.output_times(alpha)
    values = np.empty((grid.x_nodes, times.size))
    values[:, 0] = op.initial
    v = op.initial.copy()
    steps = 0
    if grid.time_mapping == "tau_substituted":
        margin = math.inf
        taus = to_u(times, alpha)
        m = grid.substeps or 1
        # steps are capped at 5% of the elapsed tau so the start-up layer of
        # non-smooth data is resolved; the first four are backward Euler
        tau = 0.0
        first = 1e-3 * op.dx**2 / problem.kappa
        for j in range(1, times.size):
            cap = (taus[j] - taus[j - 1]) / m
            while tau < taus[j]:
                dtau = min(cap, max(first, 0.05 * tau), taus[j] - tau)
                v = op.implicit_step(v, dtau, 1.0 if steps < 4 else 0.5)
                tau = taus[j] if taus[j] - tau - dtau <= 1e-14 * taus[j] else tau + dtau
                steps += 1
            values[:, j] = v
    else:
        m = grid.substeps or _stable_substeps(times, alpha, op.k)
        limit = 0.5
        worst = 0.0
        fine = grid.t_end * (np.arange((times.size - 1) * m + 1) / ((times.size - 1) * m)) ** (1.0 / alpha)
        for step in range(1, fine.size):
            dt = fine[step] - fine[step - 1]
            t_mid = 0.5 * (fine[step] + fine[step - 1])
            coeff = t_mid ** (alpha - 1) * dt
            ratio = op.k * coeff
            if ratio > limit:
                raise StabilityError(f"explicit step ratio {ratio:.4f} exceeds {limit} (t={t_mid:.4g})", step)
            worst = max(worst, ratio)
            v = v + coeff * op.apply(v)
            v[0] = op.left
            if not op.neumann:
                v[-1] = 0.0
            steps += 1
            if step % m == 0:
                values[:, step // m] = v
        margin = 1.0 - worst / limit
    field = SpaceTimeField(op.x, times, values, problem, {"fd_mapping": grid.time_mapping})
    err = None
    if reference is not None:
        X, T = np.meshgrid(op.x, times, indexing="ij")
        err = float(np.max(np.abs(np.asarray(reference(X, T)) - values)))
    return FDReport(field, margin, err, steps)


def _stable_substeps(times: np.ndarray, alpha: float, k: float) -> int:
    # largest explicit coefficient on the output mesh, then split to stay
    # below 0.45 (a little under the 0.5 bound, since substeps shift midpoints)
    t_mid = 0.5 * (times[1:] + times[:-1])
    worst = float(np.max(k * t_mid ** (alpha - 1) * np.diff(times)))
    return max(1, math.ceil(worst / 0.45))


# ---------------------------------------------------------------------------
# transport


def fd_solve_first_order(alpha, x_max: float, grid: FDGrid,
                         reference: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None) -> FDReport:
    """Upwind solve of ``T_alpha u + x u_x = x`` on ``[0, x_max]`` with ``u(0, t) = u(x, 0) = 0``.

    The advection speed ``x`` is non-negative, so backward differences are
    upwind.  The CFL number ``x_max dtau / dx`` must not exceed 1.
    """
    alpha = as_order(alpha)
    if not x_max > 0:
        raise DomainError("x_max must be positive")
    x = np.linspace(0.0, x_max, grid.x_nodes)
    dx = x[1] - x[0]
    times = grid.output_times(alpha)
    m = grid.substeps or 1
    if grid.time_mapping == "tau_substituted":
        taus = to_u(times, alpha)
        fine_tau = np.concatenate([[0.0], *[np.linspace(a, b, m + 1)[1:] for a, b in zip(taus[:-1], taus[1:])]])
        increments = np.diff(fine_tau)
    else:
        fine = grid.t_end * (np.arange((times.size - 1) * m + 1) / ((times.size - 1) * m)) ** (1.0 / alpha)
        mids = 0.5 * (fine[1:] + fine[:-1])
        increments = mids ** (alpha - 1) * np.diff(fine)
    values = np.zeros((x.size, times.size))
    v = np.zeros_like(x)
    worst = 0.0
    for step, d in enumerate(increments, start=1):
        cfl = x_max * d / dx
        if cfl > 1.0 + 1e-12:
            raise StabilityError(f"CFL number {cfl:.4f} exceeds 1", step)
        worst = max(worst, cfl)
        upd = v.copy()
        upd[1:] = v[1:] - d * x[1:] * (v[1:] - v[:-1]) / dx + d * x[1:]
        upd[0] = 0.0
        v = upd
        if step % m == 0:
            values[:, step // m] = v
    problem = DiffusionProblem("first_order", alpha)
    field = SpaceTimeField(x, times, values, problem, {"fd_mapping": grid.time_mapping})
    err = None
    if reference is not None:
        X, T = np.meshgrid(x, times, indexing="ij")
        err = float(np.max(np.abs(np.asarray(reference(X, T)) - values)))
    return FDReport(field, 1.0 - worst, err, len(increments))


# ---------------------------------------------------------------------------
# residuals


def _d2x(u: Callable, x: np.ndarray, t: np.ndarray, h: float) -> np.ndarray:
    # fourth-order central second difference
    return (-u(x + 2 * h, t) + 16 * u(x + h, t) - 30 * u(x, t) + 16 * u(x - h, t) - u(x - 2 * h, t)) / (12 * h * h)


def _d1x(u: Callable, x: np.ndarray, t: np.ndarray, h: float) -> np.ndarray:
    return (-u(x + 2 * h, t) + 8 * u(x + h, t) - 8 * u(x - h, t) + u(x - 2 * h, t)) / (12 * h)


def residual_check(u_analytic: Callable[[np.ndarray, np.ndarray], np.ndarray], problem: DiffusionProblem,
                   probe_x, probe_t, h: float = 1e-2) -> float:
    """Largest absolute residual of the governing equation at the probe grid.

    ``T_alpha u`` comes from the calculus module's conformable derivative;
    spatial derivatives use fourth-order central differences of step ``h``.
    """
    xs = np.asarray(probe_x, dtype=float)
    ts = np.asarray(probe_t, dtype=float)
    if np.any(ts <= 0):
        raise DomainError("residual probes need t > 0")
    X, T = np.meshgrid(xs, ts, indexing="ij")
    Ta = np.empty(X.shape)
    for i, xi in enumerate(xs):
        Ta[i] = conformable_derivative(lambda t, xi=xi: u_analytic(np.full_like(t, xi), t), problem.alpha, ts)
    if problem.kind == "first_order":
        res = Ta + X * _d1x(u_analytic, X, T, h) - X
    else:
        res = Ta - problem.kappa * _d2x(u_analytic, X, T, h)
    bad = ~np.isfinite(res)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise EvaluationError(f"non-finite residual at x={float(X[i, j])!r}", at=float(T[i, j]))
    return float(np.max(np.abs(res)))
