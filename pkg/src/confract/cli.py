"""Command-line front end.

Subcommands::

    transform  --f EXPR --alpha A --s GRID            -> s,re,im
    invert     --rational EXPR --alpha A --t GRID     -> t,f
    convolve   --f EXPR --g EXPR --alpha A --t GRID   -> t,value
    solve      --problem NAME --alpha A --t GRID ...  -> x,t,u field
    verify     --suite NAME --seed N | --from-csv PATH -> JSON report
    table                                             -> pair table

A GRID is a scalar, a comma-separated list, or ``start,stop,count`` (three
entries, an integer count >= 2 and start < stop).  Exit codes: 2 parse
error, 3 domain or precondition error, 4 accuracy or convergence failure,
5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import verify as verify_mod
from .calculus import as_order
from .convolution import conv_alpha
from .diffusion import DiffusionProblem, SeriesSpec, evaluate_field
from .errors import AccuracyError, ConfractError, DomainError, ExpressionSyntaxError, VerificationFailure
from .expression import compile_time_function, parse_rational
from .forward import PAIR_FAMILIES, forward_transform, pair_entry
from .inverse import BromwichSpec, invert_bromwich, invert_residues
from .quadrature import QuadratureSpec

SCHEMA = "confract-csv/1"
PROBLEMS = {"first-order": "first_order", "semi-infinite": "semi_infinite",
            "finite-mixed": "finite_mixed", "dirichlet-sine": "dirichlet_sine"}
LOG_LEVELS = {"quiet": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}
# with CONFRACT_LOG unset, warnings (e.g. series truncation) still reach stderr
DEFAULT_LOG_LEVEL = logging.WARNING
EXIT_CODES = ((ExpressionSyntaxError, 2), (DomainError, 3), (AccuracyError, 4), (VerificationFailure, 5))


def parse_grid(text: str) -> np.ndarray:
    """Scalar, comma list, or ``start,stop,count`` grid."""
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise DomainError(f"grid {text!r} is not a list of numbers") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise DomainError(f"grid {text!r} must contain finite numbers")
    if len(values) == 3 and values[2] == int(values[2]) and values[2] >= 2 and values[0] < values[1]:
        return np.linspace(values[0], values[1], int(values[2]))
    return np.asarray(values)


def _fmt(value) -> str:
    return f"{value:.17g}" if isinstance(value, float) else str(value)


@dataclass
class Table:
    """Column data with ``# key: value`` metadata lines."""

    metadata: dict
    columns: list[str]
    rows: list[list[float]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key, value in self.metadata.items():
            buf.write(f"# {key}: {_fmt(value)}\n")
        buf.write(",".join(self.columns) + "\n")
        for r in self.rows:
            buf.write(",".join(_fmt(float(v)) for v in r) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "columns": self.columns, "rows": [[float(v) for v in r] for r in self.rows]}
        return json.dumps(doc, indent=1, allow_nan=False)

    @classmethod
    def from_csv(cls, text: str) -> "Table":
        meta = {}
        lines = []
        for line in text.splitlines():
            if line.startswith("#"):
                key, _, value = line[1:].partition(":")
                value = value.strip()
                try:
                    meta[key.strip()] = float(value)
                except ValueError:
                    meta[key.strip()] = value
            elif line.strip():
                lines.append(line)
        if not lines:
            raise DomainError("CSV has no header row")
        reader = csv.reader(lines)
        columns = next(reader)
        try:
            rows = [[float(v) for v in r] for r in reader]
        except ValueError as exc:
            raise DomainError(f"CSV data is not numeric: {exc}") from None
        if any(len(r) != len(columns) for r in rows):
            raise DomainError("CSV rows do not match the header width")
        return cls(meta, columns, rows)


@dataclass
class RunConfig:
    """Validated inputs of one CLI invocation."""

    command: str
    alpha: float = 1.0
    params: dict = field(default_factory=dict)
    out: str | None = None
    fmt: str = "csv"
    seed: int = 0
    quad_nodes: int = 512
    series_terms: int = 200

    def __post_init__(self):
        self.alpha = as_order(self.alpha)
        if self.fmt not in ("csv", "json"):
            raise DomainError(f"unknown format {self.fmt!r}")
        if self.series_terms < 1:
            raise DomainError("--series-terms must be >= 1")

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(n_nodes=self.quad_nodes)

    def base_metadata(self) -> dict:
        return {"schema": SCHEMA, "command": self.command, "alpha": self.alpha}


# ---------------------------------------------------------------------------
# commands


def _transform(cfg: RunConfig) -> Table:
    f = compile_time_function(cfg.params["f"], cfg.alpha)
    meta = cfg.base_metadata() | {"f": cfg.params["f"], "quad_nodes": cfg.quad_nodes}
    table = Table(meta, ["s", "re", "im"])
    for s in parse_grid(cfg.params["s"]):
        z = complex(forward_transform(f, cfg.alpha, float(s), cfg.quad))
        table.rows.append([s, z.real, z.imag])
    return table


def _invert_values(text: str, method: str, alpha: float, t: np.ndarray) -> np.ndarray:
    F = parse_rational(text)
    if method == "residues":
        return np.atleast_1d(invert_residues(F, alpha, t))
    if method == "bromwich":
        return np.atleast_1d(invert_bromwich(F, alpha, t, BromwichSpec()))
    raise DomainError(f"unknown inversion method {method!r}; known: residues, bromwich")


def _invert(cfg: RunConfig) -> Table:
    method = cfg.params.get("method", "residues")
    t = parse_grid(cfg.params["t"])
    values = _invert_values(cfg.params["rational"], method, cfg.alpha, t)
    meta = cfg.base_metadata() | {"rational": cfg.params["rational"], "method": method}
    return Table(meta, ["t", "f"], [[ti, vi] for ti, vi in zip(t, values)])


def _convolve(cfg: RunConfig) -> Table:
    f = compile_time_function(cfg.params["f"], cfg.alpha)
    g = compile_time_function(cfg.params["g"], cfg.alpha)
    t = parse_grid(cfg.params["t"])
    values = np.atleast_1d(conv_alpha(f, g, cfg.alpha, t, cfg.quad))
    meta = cfg.base_metadata() | {"f": cfg.params["f"], "g": cfg.params["g"], "quad_nodes": cfg.quad_nodes}
    return Table(meta, ["t", "value"], [[ti, vi] for ti, vi in zip(t, values)])


def _problem(cfg: RunConfig) -> DiffusionProblem:
    name = cfg.params["problem"]
    kind = PROBLEMS.get(name, name)
    p = cfg.params
    boundary = None
    if kind == "semi_infinite":
        boundary = compile_time_function(p.get("f") or "1", cfg.alpha)
    return DiffusionProblem(kind, cfg.alpha, p.get("kappa", 1.0),
                            (p.get("length") or 1.0) if kind == "finite_mixed" else None,
                            p.get("boundary_level", 1.0) if kind == "finite_mixed" else None, boundary)


def _x_grid(cfg: RunConfig, problem: DiffusionProblem) -> np.ndarray:
    if cfg.params.get("x") is not None:
        return parse_grid(cfg.params["x"])
    n = cfg.params.get("x_nodes") or 11
    if n < 2:
        raise DomainError("--x-nodes must be >= 2")
    hi = problem.x_range[1]
    if not math.isfinite(hi):
        hi = cfg.params.get("length") or 1.0
    return np.linspace(0.0, hi, n)


def _solve(cfg: RunConfig):
    problem = _problem(cfg)
    route = cfg.params.get("route", "convolution")
    field_ = evaluate_field(problem, _x_grid(cfg, problem), parse_grid(cfg.params["t"]),
                            SeriesSpec(cfg.series_terms), cfg.quad, route)
    field_.extra = {"schema": SCHEMA, "command": "solve", "route": route, "series_terms": cfg.series_terms,
                    "quad_nodes": cfg.quad_nodes}
    return field_


def _pair_table(cfg: RunConfig) -> list[dict]:
    lam, k = cfg.params.get("lam", 1.0), cfg.params.get("k", 1)
    return [{"family": fam, "time_form": e.time_form.source, "transform": e.freq_form.source}
            for fam in PAIR_FAMILIES for e in [pair_entry(fam, {"lam": lam, "k": k}, cfg.alpha)]]


# ---------------------------------------------------------------------------
# CSV ingestion


def _recompute(meta: dict, columns: list[str], data: np.ndarray, quad_nodes: int) -> tuple[np.ndarray, str]:
    """Recompute the value column of a CSV the CLI wrote; returns (values, column)."""
    command = meta.get("command")
    params = {k: meta[k] for k in meta if k not in ("schema", "command", "alpha")}
    cfg = RunConfig(str(command), meta.get("alpha", 1.0), params, quad_nodes=int(meta.get("quad_nodes", quad_nodes)))
    if command == "transform" and columns == ["s", "re", "im"]:
        f = compile_time_function(str(params["f"]), cfg.alpha)
        z = np.array([complex(forward_transform(f, cfg.alpha, float(s), cfg.quad)) for s in data[:, 0]])
        return np.column_stack([z.real, z.imag]), "re,im"
    if command == "invert" and columns == ["t", "f"]:
        values = _invert_values(str(params["rational"]), str(params.get("method", "residues")), cfg.alpha, data[:, 0])
        return values[:, None], "f"
    if command == "convolve" and columns == ["t", "value"]:
        f = compile_time_function(str(params["f"]), cfg.alpha)
        g = compile_time_function(str(params["g"]), cfg.alpha)
        return np.atleast_1d(conv_alpha(f, g, cfg.alpha, data[:, 0], cfg.quad))[:, None], "value"
    if command == "solve" and columns == ["x", "t", "u"]:
        kind = meta.get("kind")
        problem = DiffusionProblem(kind, cfg.alpha, meta.get("kappa", 1.0), meta.get("a_len"), meta.get("U"),
                                   compile_time_function(str(meta["boundary_f"]), cfg.alpha)
                                   if kind == "semi_infinite" else None)
        xs, ts = np.unique(data[:, 0]), np.unique(data[:, 1])
        fld = evaluate_field(problem, xs, ts, SeriesSpec(int(meta.get("series_terms", 200))), cfg.quad,
                             str(meta.get("route", "convolution")))
        values = fld.values[np.searchsorted(xs, data[:, 0]), np.searchsorted(ts, data[:, 1])]
        return values[:, None], "u"
    raise DomainError(f"CSV with command {command!r} and columns {columns} is not a CLI artifact")


def verify_csv(text: str, quad_nodes: int = 512) -> list[dict]:
    """Re-read a CLI CSV and compare its values with a fresh computation."""
    table = Table.from_csv(text)
    data = np.asarray(table.rows, dtype=float).reshape(-1, len(table.columns))
    fresh, column = _recompute(table.metadata, table.columns, data, quad_nodes)
    stored = data[:, data.shape[1] - fresh.shape[1]:]
    gap = np.abs(stored - fresh)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape) if gap.size else (0, 0)
    if not gap.size:
        return [verify_mod.row(f"from_csv {column} (empty)", 0.0, 0.0, 1e-12)]
    return [verify_mod.row(f"from_csv {column} worst of {gap.size} values", stored[i, j], fresh[i, j], 1e-12,
                           scale=1e-300)]


# ---------------------------------------------------------------------------
# dispatch


def _clean(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_clean(v) for v in obj]
    return obj


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run_command(cfg: RunConfig) -> int:
    """Execute ``cfg`` and write its artifact; returns the exit status."""
    if cfg.command == "verify":
        if cfg.params.get("from_csv"):
            with open(cfg.params["from_csv"], encoding="utf-8") as fh:
                rows = verify_csv(fh.read(), cfg.quad_nodes)
            doc = {"from_csv": cfg.params["from_csv"], "checks": rows}
        else:
            suite = cfg.params.get("suite") or "transform"
            rows = verify_mod.run_suite(suite, cfg.seed, cfg.params.get("instances", 3))
            doc = {"suite": suite, "seed": cfg.seed, "checks": rows}
        doc["passed"] = verify_mod.all_passed(rows)
        _emit(json.dumps(_clean(doc), indent=1) + "\n", cfg.out)
        if not doc["passed"]:
            failed = [r["name"] for r in rows if not r["pass"]]
            raise VerificationFailure(f"{len(failed)} check(s) failed: {', '.join(failed[:5])}")
        return 0
    if cfg.command == "table":
        entries = _pair_table(cfg)
        if cfg.fmt == "json":
            _emit(json.dumps({"alpha": cfg.alpha, "pairs": entries}, indent=1) + "\n", cfg.out)
        else:
            buf = io.StringIO()
            buf.write(f"# schema: {SCHEMA}\n# command: table\n# alpha: {_fmt(cfg.alpha)}\n")
            writer = csv.DictWriter(buf, ["family", "time_form", "transform"], lineterminator="\n")
            writer.writeheader()
            writer.writerows(entries)
            _emit(buf.getvalue(), cfg.out)
        return 0
    handlers = {"transform": _transform, "invert": _invert, "convolve": _convolve, "solve": _solve}
    try:
        handler = handlers[cfg.command]
    except KeyError:
        raise DomainError(f"unknown command {cfg.command!r}") from None
    artifact = handler(cfg)
    text = artifact.to_csv() if cfg.fmt == "csv" else artifact.to_json() + "\n"
    _emit(text, cfg.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="confract", description="Conformable fractional Laplace transform toolkit.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=1.0, help="fractional order in (0, 1]")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--quad-nodes", type=int, default=512, help="quadrature node budget")
    common.add_argument("--seed", type=int, default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", parents=[common], help="forward transform of an expression")
    p.add_argument("--f", required=True, help="time function, e.g. 'exp(-u)'")
    p.add_argument("--s", required=True, help="real s grid")

    p = sub.add_parser("invert", parents=[common], help="inverse transform of a rational function")
    p.add_argument("--rational", required=True, help="rational function of s, e.g. '1/(s*(s+1))'")
    p.add_argument("--t", required=True)
    p.add_argument("--method", choices=("residues", "bromwich"), default="residues")

    p = sub.add_parser("convolve", parents=[common], help="fractional convolution of two expressions")
    p.add_argument("--f", required=True)
    p.add_argument("--g", required=True)
    p.add_argument("--t", required=True)

    p = sub.add_parser("solve", parents=[common], help="closed-form solution of a diffusion problem")
    p.add_argument("--problem", required=True, choices=tuple(PROBLEMS))
    p.add_argument("--t", required=True)
    p.add_argument("--x", help="x grid (overrides --x-nodes)")
    p.add_argument("--x-nodes", type=int, help="uniform x nodes over the domain (default 11)")
    p.add_argument("--kappa", type=float, default=1.0)
    p.add_argument("--length", type=float, help="domain length (finite-mixed) or x extent (infinite domains)")
    p.add_argument("--boundary-level", type=float, default=1.0, help="boundary value U (finite-mixed)")
    p.add_argument("--f", help="boundary function (semi-infinite, default '1')")
    p.add_argument("--route", choices=("convolution", "similarity", "both"), default="convolution")
    p.add_argument("--series-terms", type=int, default=200)

    p = sub.add_parser("verify", parents=[common], help="run an invariant suite or re-check a CSV")
    p.add_argument("--suite", choices=verify_mod.SUITES)
    p.add_argument("--from-csv", help="re-read a CSV written by this CLI and recompute it")
    p.add_argument("--instances", type=int, default=3, help="random instances per randomized check")

    p = sub.add_parser("table", parents=[common], help="print the transform pair table")
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--k", type=int, default=1)
    return parser


_CONFIG_KEYS = {"command", "alpha", "out", "format", "seed", "quad_nodes", "series_terms"}


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    params = {k: v for k, v in vars(ns).items() if k not in _CONFIG_KEYS}
    return RunConfig(ns.command, ns.alpha, params, ns.out, ns.format, ns.seed, ns.quad_nodes,
                     getattr(ns, "series_terms", 200))


def _configure_logging() -> None:
    level_name = os.environ.get("CONFRACT_LOG", "").strip().lower()
    if level_name and level_name not in LOG_LEVELS:
        raise DomainError(f"CONFRACT_LOG must be one of {', '.join(LOG_LEVELS)}, got {level_name!r}")
    logging.captureWarnings(True)
    root = logging.getLogger()
    root.handlers[:] = [logging.StreamHandler(sys.stderr)]
    root.setLevel(LOG_LEVELS.get(level_name, DEFAULT_LOG_LEVEL))


def exit_code(exc: BaseException) -> int:
    for cls, code in EXIT_CODES:
        if isinstance(exc, cls):
            return code
    return 1


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        _configure_logging()
        return run_command(config_from_args(ns))
    except ConfractError as exc:
        print(f"confract: error: {exc}", file=sys.stderr)
        return exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
