import csv
import io
import json
import math
import subprocess
import sys

import jsonschema
import pytest

from linea.cli import CSV_COLUMNS, OUTPUT_SCHEMA, run


def call(argv, capsys):
    code = run(argv)
    out = capsys.readouterr().out
    return code, out


def call_json(argv, capsys):
    code, out = call(argv, capsys)
    doc = json.loads(out)
    jsonschema.validate(doc, OUTPUT_SCHEMA)
    return code, doc


def test_linearize_coeffs_exp(capsys):
    code, doc = call_json(["linearize", "coeffs", "--poly", "z^2", "--fixed-point", "1", "--order", "30"], capsys)
    assert code == 0
    coeffs = doc["result"]["coeffs"]
    assert len(coeffs) == 31
    for n, (re, im) in enumerate(coeffs):
        assert abs(re * math.factorial(n) - 1) < 1e-10 and im == 0
    assert doc["diagnostics"]["residuals"]["functional_equation"] < 1e-12


def test_order_alias_empirical(capsys):
    code, doc = call_json(["order", "--poly", "1.5*z+z^2", "--fixed-point", "0", "--empirical",
                           "--radii", "1e2,1e3,1e4,1e5"], capsys)
    assert code == 0 and doc["command"] == "linearize order"
    assert doc["result"]["value"] == pytest.approx(1.71, abs=0.09)


def test_exp_identity_cli(capsys):
    code, doc = call_json(["qd", "exp-identity", "--w", "2", "--terms", "100000"], capsys)
    assert code == 0 and doc["result"]["abs_diff"] < 1e-3


def test_fixed_point_snapping(capsys):
    code, doc = call_json(["linearize", "eval", "--poly", "z^2-1", "--fixed-point", "1.6180339",
                           "--z", "0.3"], capsys)
    assert code == 0
    code, doc = call_json(["linearize", "eval", "--poly", "z^2-1", "--fixed-point", "1.5", "--z", "0"], capsys)
    assert code == 3 and doc["error"]["type"] == "InvalidArguments"


@pytest.mark.parametrize("argv", [
    ["roots", "--poly", "z^2+"],
    ["roots"],
    ["nonsense"],
    ["area", "sum", "--map", "exp", "--w", "1", "--t", "9"],
    ["poincare-series", "--poly", "z^2", "--w", "4", "--depth", "0"],
])
def test_invalid_arguments_exit_3(argv, capsys):
    code, doc = call_json(argv, capsys)
    assert code == 3 and "error" in doc


def test_numerical_errors_exit_2(capsys):
    code, doc = call_json(["area", "sum", "--map", "exp", "--w", "0"], capsys)
    assert code == 2 and doc["error"]["type"] == "SingularQuery"
    code, doc = call_json(["linearize", "coeffs", "--poly", "0.5*z+z^2", "--fixed-point", "0"], capsys)
    assert code == 2 and doc["error"]["type"] == "NotRepelling"


def test_require_verdict(capsys):
    base = ["area", "sum", "--map", "exp", "--w", "1", "--n-max", "5000"]
    code, doc = call_json(base + ["--t", "2", "--require-verdict", "converged"], capsys)
    assert code == 0 and doc["diagnostics"]["verdict"] == "converged"
    code, doc = call_json(base + ["--t", "1", "--require-verdict", "converged"], capsys)
    assert code == 2 and doc["error"]["type"] == "VerdictMismatch"


@pytest.mark.parametrize("argv", [
    ["roots", "--poly", "z^3-1"],
    ["fixed-points", "--poly", "z^2-1"],
    ["critical-orbit", "--poly", "z^2-1"],
    ["preimages", "--poly", "z^2-1", "--w", "3", "--depth", "4"],
    ["poincare-series", "--poly", "z^2-1", "--w", "3", "--depth", "8"],
    ["linearize", "coeffs", "--poly", "z^2", "--fixed-point", "1", "--order", "10"],
    ["linearize", "eval", "--poly", "z^2-2", "--fixed-point", "2", "--z", "-9.8696044010893586"],
    ["linearize", "order", "--poly", "z^2", "--fixed-point", "1", "--empirical"],
    ["area", "sum", "--map", "cosh_sqrt", "--w", "10", "--n-max", "100"],
    ["area", "sum", "--poly", "1.5*z+z^2", "--fixed-point", "0", "--w", "3", "--depth", "8"],
    ["area", "mc", "--map", "exp", "--region", "disc:1,0,0.1", "--r-max", "100", "--samples", "20000"],
    ["area", "el-growth", "--poly", "z^2-1", "--fixed-point", "1.618034", "--region", "filled-julia",
     "--n-max", "3", "--samples", "2000"],
    ["area", "distance", "--w", "1", "--k-max", "100"],
    ["area", "siegel", "--depth", "8"],
    ["qd", "pushforward", "--w", "2", "--n-max", "1000"],
    ["qd", "pole-fit", "--n-max", "1000"],
    ["qd", "pole-fit", "--exact-den", "z^3-2z^2+z"],
    ["schwarzian-order", "--kind", "entire_nonlinearity", "--count", "1"],
])
def test_every_command_json_and_csv(argv, capsys):
    code, doc = call_json(argv, capsys)
    assert code == 0, doc.get("error")
    command = doc["command"]
    code, out = call(argv + ["--format", "csv"], capsys)
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == CSV_COLUMNS[command]
    assert len(rows) >= 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ndepth = 5\nseed = 9\n")
    code, doc = call_json(["poincare-series", "--poly", "z^2-1", "--w", "3", "--config", str(cfg)], capsys)
    assert doc["config"]["depth"] == 5 and doc["config"]["seed"] == 9
    assert len(doc["result"]["level_sums"]) == 5
    code, doc = call_json(["poincare-series", "--poly", "z^2-1", "--w", "3", "--config", str(cfg),
                           "--depth", "6"], capsys)
    assert len(doc["result"]["level_sums"]) == 6
    cfg.write_text("colour = red\n")
    code, doc = call_json(["roots", "--poly", "z^2", "--config", str(cfg)], capsys)
    assert code == 3


def test_output_path(tmp_path, capsys):
    out = tmp_path / "o.json"
    code, text = call(["roots", "--poly", "z^2-4", "--output", str(out)], capsys)
    assert code == 0 and text == ""
    doc = json.loads(out.read_text())
    assert [r[0] for r in doc["result"]["roots"]] == pytest.approx([-2, 2])


def test_byte_identical_output(capsys):
    argv = ["area", "mc", "--map", "exp", "--region", "disc:1,0,0.3", "--r-max", "50", "--samples", "30000",
            "--seed", "4"]
    a = call(argv, capsys)
    b = call(argv, capsys)
    assert a == b
    # thread count changes only the echoed config, never the numbers
    c = json.loads(call(argv + ["--partitions", "3", "--threads", "3"], capsys)[1])
    d = json.loads(call(argv + ["--partitions", "3", "--threads", "1"], capsys)[1])
    assert c["result"] == d["result"] and c["diagnostics"] == d["diagnostics"]


def test_console_entry_point():
    r = subprocess.run([sys.executable, "-m", "linea", "schwarzian-order", "--kind", "log_singularity_count",
                        "--count", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["result"]["value"] == 1.0
