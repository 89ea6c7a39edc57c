import json
import math
import subprocess
import sys

import numpy as np
import pytest

from confract.cli import RunConfig, Table, exit_code, main, parse_grid, verify_csv
from confract.errors import (AccuracyError, DomainError, ExpressionSyntaxError, UnknownIdentifierError,
                             VerificationFailure)
from confract.expression import parse_expression


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_dirichlet_sine_example(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "dirichlet-sine", "--alpha", "0.5", "--x-nodes", "5", "--t", "0,1")
    assert code == 0
    table = Table.from_csv(out)
    rows = {(r[0], r[1]): r[2] for r in table.rows}
    assert rows[(math.pi / 2, 1.0)] == pytest.approx(math.exp(-2), abs=1e-15)
    assert rows[(math.pi / 2, 0.0)] == 1.0
    assert table.metadata["kind"] == "dirichlet_sine"


def test_invert_example(capsys):
    code, out, _ = run(capsys, "invert", "--rational", "1/(s*(s+1))", "--alpha", "1", "--t", "1")
    assert code == 0
    assert Table.from_csv(out).rows[0][1] == pytest.approx(1 - math.exp(-1), abs=1e-9)


def test_invert_bromwich_route(capsys):
    code, out, _ = run(capsys, "invert", "--rational", "1/(s*(s+1))", "--alpha", "0.5", "--t", "1",
                       "--method", "bromwich")
    assert code == 0
    assert Table.from_csv(out).rows[0][1] == pytest.approx(1 - math.exp(-2), rel=1e-5)


def test_verify_convolution_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "convolution", "--seed", "42")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["checks"] and all(c["pass"] for c in doc["checks"])
    for key in ("name", "lhs", "rhs", "abs_err", "rel_err", "pass"):
        assert key in doc["checks"][0]


def test_transform_and_convolve_outputs(capsys):
    code, out, _ = run(capsys, "transform", "--f", "exp(-u)", "--alpha", "0.7", "--s", "1,3,3")
    assert code == 0
    table = Table.from_csv(out)
    assert table.columns == ["s", "re", "im"]
    for s, re, im in table.rows:
        assert re == pytest.approx(1 / (s + 1), rel=1e-10)
        assert im == 0.0
    code, out, _ = run(capsys, "convolve", "--f", "1", "--g", "exp(-u)", "--alpha", "0.7", "--t", "2")
    assert Table.from_csv(out).rows[0][1] == pytest.approx(1 - math.exp(-(2**0.7) / 0.7), abs=1e-7)


def test_table_command(capsys):
    code, out, _ = run(capsys, "table", "--alpha", "0.5", "--format", "json")
    assert code == 0
    families = [p["family"] for p in json.loads(out)["pairs"]]
    assert families == ["const", "exp_eigen", "sin_eigen", "cos_eigen", "power_alpha"]
    code, out, _ = run(capsys, "table")
    assert out.splitlines()[3] == "family,time_form,transform"


def test_json_field_output(capsys):
    code, out, _ = run(capsys, "solve", "--problem", "first-order", "--alpha", "0.5", "--x", "0,1,3", "--t", "0,1",
                       "--format", "json")
    doc = json.loads(out)
    assert np.array(doc["values"]).shape == (3, 2)
    assert doc["values"][2][1] == pytest.approx(1 - math.exp(-2), rel=1e-15)


# determinism


DETERMINISM_CASES = [
    ("solve", "--problem", "finite-mixed", "--alpha", "0.5", "--x-nodes", "6", "--t", "0.1,1,4", "--length", "2"),
    ("solve", "--problem", "semi-infinite", "--alpha", "0.6", "--f", "exp(-u)", "--x", "0.5,1", "--t", "0.5,2"),
    ("transform", "--f", "sin(t)*exp(-u)", "--alpha", "0.4", "--s", "1,4,4"),
    ("verify", "--suite", "inverse", "--seed", "7"),
]


@pytest.mark.parametrize("argv", DETERMINISM_CASES, ids=lambda a: a[0] + "-" + a[2])
def test_reruns_are_byte_identical(argv, tmp_path):
    paths = [tmp_path / f"run{i}.out" for i in range(2)]
    for p in paths:
        assert main([*argv, "--out", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


# exit-code contract


def test_exit_code_parse_error(capsys):
    code, _, err = run(capsys, "transform", "--f", "exp(-u", "--s", "1")
    assert code == 2
    assert "offset 7" in err and "')'" in err


def test_exit_code_domain_error(capsys):
    code, _, err = run(capsys, "invert", "--rational", "1/s", "--t", "1", "--alpha", "1.5")
    assert code == 3
    assert "fractional order" in err


def test_exit_code_accuracy_error(capsys):
    code, _, err = run(capsys, "solve", "--problem", "semi-infinite", "--f", "sin(4000*t)", "--route", "both",
                       "--x", "0.5", "--t", "1", "--alpha", "0.6")
    assert code == 4
    assert "disagree" in err


def test_exit_code_verification_failure(capsys, tmp_path):
    path = tmp_path / "inv.csv"
    assert main(["invert", "--rational", "1/(s*(s+1))", "--t", "1", "--out", str(path)]) == 0
    text = path.read_text().replace("0.63212055882855767", "0.63212")
    path.write_text(text)
    code, out, _ = run(capsys, "verify", "--from-csv", str(path))
    assert code == 5
    assert json.loads(out)["passed"] is False


def test_exit_code_mapping():
    assert exit_code(ExpressionSyntaxError("x", 1)) == 2
    assert exit_code(DomainError("x")) == 3
    assert exit_code(AccuracyError("x")) == 4
    assert exit_code(VerificationFailure("x")) == 5
    assert exit_code(RuntimeError("x")) == 1


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "confract", "transform", "--f", "exp(-u", "--s", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2


# grammar


@pytest.mark.parametrize("text,col,expected", [
    ("exp(-u", 7, ")"),
    ("1 +", 4, "number"),
    ("(t", 3, ")"),
    ("t * * u", 5, "number"),
    ("2 t", 3, "end of input"),
    ("sin t", 5, "("),
])
def test_syntax_error_locations(text, col, expected):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert info.value.offset == col
    assert expected in info.value.expected


def test_unknown_identifier_lists_vocabulary():
    with pytest.raises(UnknownIdentifierError) as info:
        parse_expression("t + log(t)")
    assert info.value.offset == 5
    assert "exp, sin, cos, sqrt" in str(info.value)


# round trips


ROUND_TRIPS = [
    ("invert", "--rational", "(s+2)/((s+1)*(s+3))", "--alpha", "0.5", "--t", "0.1,3,5"),
    ("transform", "--f", "1 - exp(-u)", "--alpha", "0.7", "--s", "1,5,3"),
    ("convolve", "--f", "sqrt(t)", "--g", "cos(u)", "--alpha", "0.6", "--t", "0.5,2,4"),
    ("solve", "--problem", "semi-infinite", "--alpha", "0.5", "--x", "0.3,1", "--t", "0.5,1.5"),
    ("solve", "--problem", "finite-mixed", "--alpha", "0.8", "--x-nodes", "5", "--t", "0,2,3", "--length", "1.5",
     "--boundary-level", "2"),
    ("solve", "--problem", "dirichlet-sine", "--alpha", "0.3", "--x-nodes", "4", "--t", "0.5"),
]


@pytest.mark.parametrize("argv", ROUND_TRIPS, ids=lambda a: a[0] + "-" + a[2])
def test_csv_round_trip(argv, tmp_path, capsys):
    path = tmp_path / "artifact.csv"
    assert main([*argv, "--out", str(path)]) == 0
    rows = verify_csv(path.read_text())
    assert all(r["pass"] for r in rows)
    code, out, _ = run(capsys, "verify", "--from-csv", str(path))
    assert code == 0 and json.loads(out)["passed"]


def test_foreign_csv_is_rejected():
    with pytest.raises(DomainError):
        verify_csv("# command: plot\na,b\n1,2\n")


# grids, config and logging


def test_parse_grid_forms():
    assert parse_grid("2.5").tolist() == [2.5]
    assert parse_grid("0,1,5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert parse_grid("1,0,5").tolist() == [1.0, 0.0, 5.0]
    assert parse_grid("0,1,2.5").tolist() == [0.0, 1.0, 2.5]
    assert parse_grid("0.1,0.2,0.3,0.4").tolist() == [0.1, 0.2, 0.3, 0.4]
    for bad in ("", "a,b", "1,nan"):
        with pytest.raises(DomainError):
            parse_grid(bad)


def test_run_config_validation():
    with pytest.raises(DomainError):
        RunConfig("solve", alpha=0.0)
    with pytest.raises(DomainError):
        RunConfig("solve", fmt="xml")
    with pytest.raises(DomainError):
        RunConfig("solve", series_terms=0)


def cli_process(env_value, *argv):
    import os

    env = dict(os.environ)
    env.pop("CONFRACT_LOG", None)
    if env_value is not None:
        env["CONFRACT_LOG"] = env_value
    return subprocess.run([sys.executable, "-m", "confract", *argv], capture_output=True, text=True, env=env)


def test_log_levels():
    # run out of process: pytest's own warning capture would swallow the truncation warning
    argv = ("solve", "--problem", "finite-mixed", "--alpha", "0.5", "--x", "0.5", "--t", "1e-9",
            "--series-terms", "3")
    proc = cli_process(None, *argv)
    assert proc.returncode == 0 and "truncated" in proc.stderr
    proc = cli_process("quiet", *argv)
    assert proc.returncode == 0 and proc.stderr == ""
    proc = cli_process("debug", *argv)
    assert proc.returncode == 0 and "truncated" in proc.stderr
    proc = cli_process("loud", *argv)
    assert proc.returncode == 3 and "CONFRACT_LOG" in proc.stderr
