"""Named invariant suites used by ``confract verify``.

Each suite returns a list of rows ``{name, lhs, rhs, abs_err, rel_err, tol,
pass}``.  Randomized instances come from a seeded generator, so a suite is
a deterministic function of its seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate as sp_integrate
from scipy import special

from .calculus import TimeFunction, conformable_derivative, conformable_integral, nth_conformable_derivative, to_u
from .convolution import LAWS, YOUNG_SLACK, check_convolution_algebra, check_convolution_theorem, check_young
from .diffusion import (DiffusionProblem, SeriesSpec, solve_dirichlet_sine, solve_finite_mixed,
                        solve_first_order, solve_semi_infinite)
from .errors import LookupFailure
from .fd_oracle import FDGrid, fd_solve_diffusion, fd_solve_first_order, residual_check
from .forward import (PROPERTIES, FrequencyExpression, check_property, derivative_transform_check, final_value,
                      forward_transform, initial_value, integral_transform_check, nth_derivative_transform_check,
                      pair_lookup)
from .inverse import BromwichSpec, invert_bromwich, invert_residues

SUITES = ("calculus", "transform", "inverse", "convolution", "diffusion", "oracle")


def row(name: str, lhs, rhs, tol: float, mode: str = "rel", scale: float = 0.0) -> dict:
    """Comparison row; ``mode="abs"`` passes on the absolute error."""
    lhs, rhs = float(np.real(lhs)), float(np.real(rhs))
    abs_err = abs(lhs - rhs)
    ref = max(abs(lhs), abs(rhs), scale)
    rel_err = abs_err / ref if ref > 0 else (0.0 if abs_err == 0 else math.inf)
    measured = abs_err if mode == "abs" else rel_err
    return {"name": name, "lhs": lhs, "rhs": rhs, "abs_err": abs_err, "rel_err": rel_err,
            "tol": tol, "mode": mode, "pass": bool(measured <= tol)}


def report_row(name: str, report, tol: float) -> dict:
    out = report.as_dict(tol)
    out["name"] = name
    out["mode"] = "rel"
    return out


# ---------------------------------------------------------------------------
# random smooth functions


@dataclass(frozen=True)
class SmoothFunction:
    """``f(t) = (c0 + c1 u + c2 u^2) exp(-lam u)`` with ``u = t**alpha / alpha``."""

    coeffs: tuple[float, float, float]
    lam: float
    alpha: float

    def __call__(self, t):
        u = to_u(np.asarray(t, dtype=float), self.alpha)
        c0, c1, c2 = self.coeffs
        return (c0 + c1 * u + c2 * u * u) * np.exp(-self.lam * u)

    def derivative(self, t):
        """Exact ``T_alpha f``: the u-derivative of the profile."""
        u = to_u(np.asarray(t, dtype=float), self.alpha)
        c0, c1, c2 = self.coeffs
        return (c1 + 2 * c2 * u - self.lam * (c0 + c1 * u + c2 * u * u)) * np.exp(-self.lam * u)

    def as_time_function(self) -> TimeFunction:
        # u^k exp(-lam u) <= (2k / (e lam))^k exp(-lam u / 2)
        m = sum(c * ((2 * k / (math.e * self.lam)) ** k if k else 1.0) for k, c in enumerate(self.coeffs))
        return TimeFunction(self, source=self.source, growth_bound=(m, -self.lam / 2))

    @property
    def source(self) -> str:
        c0, c1, c2 = self.coeffs
        return f"({c0!r} + {c1!r}*u + {c2!r}*u^2)*exp(-{self.lam!r}*u)"


def random_smooth(rng: np.random.Generator, alpha: float, vanish_at_zero: bool = False) -> SmoothFunction:
    c = rng.uniform(0.2, 1.0, 3)
    if vanish_at_zero:
        c[0] = 0.0
    return SmoothFunction(tuple(float(v) for v in c), float(rng.uniform(0.5, 2.0)), float(alpha))


# ---------------------------------------------------------------------------
# suites


def suite_calculus(seed: int = 0, instances: int = 3) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(instances):
        alpha = float(rng.uniform(0.3, 1.0))
        f = random_smooth(rng, alpha)
        for t in (0.5, 1.0, 2.0):
            rows.append(row(f"derivative[{i}] alpha={alpha:.3f} t={t}",
                            conformable_derivative(f.as_time_function(), alpha, t), f.derivative(t), 1e-6,
                            scale=1e-3))
        u_end = float(to_u(1.5, alpha))
        exact = sp_integrate.quad(lambda u: f((alpha * u) ** (1 / alpha)), 0.0, u_end, epsabs=0, epsrel=1e-13)[0]
        rows.append(row(f"integral[{i}] alpha={alpha:.3f} t=1.5",
                        conformable_integral(f.as_time_function(), alpha, 1.5), exact, 1e-10))
    eig = pair_lookup("exp_eigen", {"lam": -1.0}, 0.5)[0]
    for n in (2, 3):
        rows.append(row(f"nested_derivative n={n} of exp(-u)", nth_conformable_derivative(eig, 0.5, n, 1.0),
                        (-1) ** n * math.exp(-2.0), 1e-5))
    rows.append(row("derivative of t at alpha=0.5, t=4", conformable_derivative(lambda t: t, 0.5, 4.0), 2.0, 1e-8))
    return rows


def _pair_rows(alphas=(0.3, 0.7, 1.0), s_values=(2.0, 5.0)) -> list[dict]:
    rows = []
    for alpha in alphas:
        for fam, params in (("const", {}), ("exp_eigen", {"lam": -2.0}), ("exp_eigen", {"lam": 1.5}),
                            ("power_alpha", {"k": 1}), ("sin_eigen", {"lam": 1.0}), ("cos_eigen", {"lam": 1.0})):
            f, F = pair_lookup(fam, params, alpha)
            for s in s_values:
                rows.append(row(f"pair {f.source} alpha={alpha} s={s}", forward_transform(f, alpha, s), F(s), 1e-6))
    return rows


def property_rows(seed: int, instances: int) -> list[dict]:
    """Elementary transform properties over seeded random instances."""
    rng = np.random.default_rng(seed)
    rows = []
    for prop in PROPERTIES:
        for i in range(instances):
            alpha = float(rng.uniform(0.3, 1.0))
            s = float(rng.uniform(1.0, 5.0))
            f = random_smooth(rng, alpha, vanish_at_zero=prop == "div_t_alpha").as_time_function()
            g = random_smooth(rng, alpha).as_time_function()
            a = float(rng.uniform(0.3, 0.9))
            coeffs = tuple(float(c) for c in rng.uniform(-2.0, 2.0, 2))
            rep = check_property(prop, f, alpha, s, a=a, g=g, coeffs=coeffs)
            rows.append(report_row(f"{prop}[{i}] alpha={alpha:.3f} s={s:.3f}", rep, 1e-6))
    return rows


def suite_transform(seed: int = 0, instances: int = 3) -> list[dict]:
    rows = _pair_rows()
    rows += property_rows(seed, instances)
    eig = pair_lookup("exp_eigen", {"lam": -1.0}, 0.5)[0]
    rows.append(report_row("derivative_rule eigen alpha=beta=0.5", derivative_transform_check(eig, 0.5, 0.5, 2.0),
                           1e-6))
    # t^(alpha-beta) f needs a finite limit at 0, so the general case uses u exp(-u)
    ramp = SmoothFunction((0.0, 1.0, 0.0), 1.0, 0.5).as_time_function()
    rows.append(report_row("derivative_rule u*exp(-u) alpha=0.5 beta=0.7",
                           derivative_transform_check(ramp, 0.5, 0.7, 2.0), 1e-5))
    rows.append(report_row("second_derivative_rule alpha=beta=0.5",
                           nth_derivative_transform_check(eig, 0.5, 0.5, 2, 2.0), 1e-4))
    rows.append(report_row("integral_rule alpha=0.5 beta=0.7", integral_transform_check(eig, 0.5, 0.7, 2.0), 1e-5))
    for F, f0, finf in ((FrequencyExpression.rational([1.0], [1.0, 1.0]), 1.0, 0.0),
                        (FrequencyExpression.rational([1.0], [1.0, 1.0, 0.0]), 0.0, 1.0)):
        rows.append(row(f"initial_value {F.source}", initial_value(F), f0, 1e-9, mode="abs"))
        rows.append(row(f"final_value {F.source}", final_value(F), finf, 1e-9, mode="abs"))
    return rows


def suite_inverse(seed: int = 0, instances: int = 3) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(instances):
        alpha = float(rng.uniform(0.3, 1.0))
        poles = -np.sort(rng.uniform(0.2, 3.0, 3))
        res = rng.uniform(-2.0, 2.0, 3)
        den = np.poly(poles)
        num = sum(r * np.poly(np.delete(poles, k)) for k, r in enumerate(res))
        F = FrequencyExpression.rational(num, den, f"random[{i}]")
        for t in (0.5, 2.0):
            exact = float(np.sum(res * np.exp(poles * to_u(t, alpha))))
            rows.append(row(f"residues {F.source} alpha={alpha:.3f} t={t}", invert_residues(F, alpha, t), exact,
                            1e-9, scale=float(np.sum(np.abs(res)))))
            rows.append(row(f"bromwich {F.source} alpha={alpha:.3f} t={t}",
                            invert_bromwich(F, alpha, t, BromwichSpec()), exact, 1e-6,
                            scale=float(np.sum(np.abs(res)))))
    double = FrequencyExpression.rational([1.0], [1.0, 2.0, 1.0], "1/(s+1)^2")
    rows.append(row("residues 1/(s+1)^2 alpha=0.5 t=1", invert_residues(double, 0.5, 1.0), 2 * math.exp(-2), 1e-9))
    example = FrequencyExpression.rational([1.0], [1.0, 1.0, 0.0], "1/(s*(s+1))")
    rows.append(row("residues 1/(s*(s+1)) alpha=1 t=1", invert_residues(example, 1.0, 1.0), 1 - math.exp(-1), 1e-9))
    return rows


def suite_convolution(seed: int = 0, instances: int = 3) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    tols = {"commutativity": 1e-7, "distributivity": 1e-7, "scalar": 1e-7, "associativity": 1e-5}
    for i in range(instances):
        alpha = float(rng.uniform(0.3, 1.0))
        f, g, h = (random_smooth(rng, alpha).as_time_function() for _ in range(3))
        t = float(rng.uniform(0.5, 3.0))
        c = float(rng.uniform(-3.0, 3.0))
        for law in LAWS:
            rep = check_convolution_algebra(law, f, g, h, c, alpha, t)
            rows.append(report_row(f"{law}[{i}] alpha={alpha:.3f} t={t:.3f}", rep, tols[law]))
        s = float(rng.uniform(1.0, 4.0))
        rows.append(report_row(f"convolution_theorem[{i}] alpha={alpha:.3f} s={s:.3f}",
                               check_convolution_theorem(f, g, alpha, s), 1e-5))
        for n in (1.0, 2.0):
            rep = check_young(f, g, n, alpha)
            excess = max(rep.lhs - rep.rhs, 0.0)
            rows.append({"name": f"young[{i}] n={n} alpha={alpha:.3f}", "lhs": rep.lhs, "rhs": rep.rhs,
                         "abs_err": excess, "rel_err": excess / rep.rhs if rep.rhs else 0.0,
                         "tol": YOUNG_SLACK, "mode": "inequality", "pass": rep.passed})
    return rows


def suite_diffusion(seed: int = 0, instances: int = 3) -> list[dict]:
    rows = []
    xs = np.linspace(0.0, math.pi, 5)
    ts = np.linspace(0.2, 2.0, 5)
    X, T = np.meshgrid(xs, ts, indexing="ij")
    for alpha in (0.4, 0.7):
        collapse = np.max(np.abs(solve_dirichlet_sine(X, T, alpha) - solve_dirichlet_sine(X, to_u(T, alpha), 1.0)))
        rows.append(row(f"alpha_collapse dirichlet_sine alpha={alpha}", collapse, 0.0, 1e-12, mode="abs"))
    for alpha in (0.5, 1.0):
        for x, t in ((0.5, 1.0), (1.0, 0.3), (2.0, 2.0)):
            u = to_u(t, alpha)
            rows.append(row(f"erfc semi_infinite alpha={alpha} x={x} t={t}",
                            solve_semi_infinite(x, t, alpha, 1.0, 1.0), special.erfc(x / (2 * math.sqrt(u))),
                            1e-6, mode="abs"))
    decay = TimeFunction(lambda t: np.exp(-to_u(t, 0.6)), "exp(-u)", (1.0, -1.0))
    for x, t in ((0.3, 1.0), (1.0, 2.0)):
        rows.append(row(f"routes semi_infinite f=exp(-u) alpha=0.6 x={x} t={t}",
                        solve_semi_infinite(x, t, 0.6, 1.0, decay, "convolution"),
                        solve_semi_infinite(x, t, 0.6, 1.0, decay, "similarity"), 1e-4))
    rows.append(row("finite_mixed u(0,t)=U", solve_finite_mixed(0.0, 0.7, 0.5, 1.0, 1.0, 2.5), 2.5, 0.0, mode="abs"))
    problem = DiffusionProblem("dirichlet_sine", 0.5)
    res = residual_check(lambda x, t: solve_dirichlet_sine(x, t, 0.5), problem, [0.5, 1.5, 2.5], [0.5, 1.0, 2.0])
    rows.append(row("residual dirichlet_sine alpha=0.5", res, 0.0, 1e-4, mode="abs"))
    problem = DiffusionProblem("first_order", 0.5)
    res = residual_check(lambda x, t: solve_first_order(x, t, 0.5), problem, [0.5, 1.0], [0.5, 1.0, 2.0])
    rows.append(row("residual first_order alpha=0.5", res, 0.0, 1e-4, mode="abs"))
    return rows


def suite_oracle(seed: int = 0, instances: int = 3) -> list[dict]:
    rows = []
    alpha = 0.5
    ds = DiffusionProblem("dirichlet_sine", alpha)
    for mapping in ("tau_substituted", "direct_graded"):
        rep = fd_solve_diffusion(ds, FDGrid(41, 11, 1.0, mapping),
                                 reference=lambda X, T: solve_dirichlet_sine(X, T, alpha))
        rows.append(row(f"fd dirichlet_sine {mapping} alpha={alpha}", rep.max_abs_err, 0.0, 2e-3, mode="abs"))
    fm = DiffusionProblem("finite_mixed", alpha, 1.0, 1.0, 1.0)
    for mapping in ("tau_substituted", "direct_graded"):
        rep = fd_solve_diffusion(fm, FDGrid(41, 11, 1.0, mapping),
                                 reference=lambda X, T: solve_finite_mixed(X, T, alpha, 1.0, 1.0, 1.0,
                                                                          SeriesSpec(400, 0.0)))
        rows.append(row(f"fd finite_mixed {mapping} alpha={alpha}", rep.max_abs_err, 0.0, 5e-3, mode="abs"))
    t_end = (alpha * 1.0) ** (1 / alpha)
    rep = fd_solve_first_order(alpha, 1.0, FDGrid(201, 401, t_end), reference=lambda X, T: solve_first_order(X, T, alpha))
    rows.append(row(f"fd first_order alpha={alpha}", rep.max_abs_err, 0.0, 5e-3, mode="abs"))
    return rows


_SUITES = {
    "calculus": suite_calculus,
    "transform": suite_transform,
    "inverse": suite_inverse,
    "convolution": suite_convolution,
    "diffusion": suite_diffusion,
    "oracle": suite_oracle,
}


def run_suite(name: str, seed: int = 0, instances: int = 3) -> list[dict]:
    try:
        suite = _SUITES[name]
    except KeyError:
        raise LookupFailure(f"unknown suite {name!r}; known: {', '.join(SUITES)}") from None
    return suite(seed, instances)


def all_passed(rows: list[dict]) -> bool:
    return all(r["pass"] for r in rows)
