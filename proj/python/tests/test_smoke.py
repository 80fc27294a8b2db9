import json
import subprocess

import numpy as np
import pytest

jsonschema = pytest.importorskip("jsonschema")


def run(cli, *args):
    proc = subprocess.run([cli, *map(str, args)], capture_output=True, text=True)
    return proc.returncode, proc.stdout


def validate(schemas, name, payload):
    schema = json.loads((schemas / f"{name}.schema.json").read_text())
    jsonschema.validate(payload, schema)


def test_cone_report(cli, schemas, tmp_path):
    code, out = run(cli, "cone", "--spec", "sigma:2", "--dim", "4")
    assert code == 0
    rep = json.loads(out)
    validate(schemas, "cone", rep)
    assert rep["closed_form"] == 2.0
    assert abs(rep["riesz_characteristic"] - 2.0) < 1e-6

    (tmp_path / "a.csv").write_text("1,0,0\n0,2,0\n0,0,-0.5\n")
    code, out = run(cli, "cone", "--spec", "pp:2", "--dim", "3", "--matrix", tmp_path / "a.csv")
    rep = json.loads(out)
    validate(schemas, "cone", rep)
    assert rep["member"] is True


@pytest.mark.parametrize(
    "args, code",
    [
        (["monotone", "--f", "mapb:2:3", "--m", "pp:2", "--dim", "4", "--samples", "2000", "--seed", "7"], 0),
        (["duality", "--f", "branch:1", "--dim", "3", "--samples", "2000"], 0),
        (["pp-subset", "--m", "pdelta:1", "--dim", "3", "--p", "2.01"], 1),
    ],
)
def test_check(cli, schemas, args, code):
    rc, out = run(cli, "check", *args)
    assert rc == code
    rep = json.loads(out)
    validate(schemas, "check", rep)
    assert rep["pass"] == (code == 0)


def test_kernel_polar_grid(cli, schemas, tmp_path):
    rc, out = run(cli, "kernel", "--p", "2.5", "--dim", "3", "--x", "1,0,0", "--x", "0,0,0")
    assert rc == 0
    rep = json.loads(out)
    validate(schemas, "kernel", rep)
    assert rep["points"][0]["value"] == -1.0 and rep["points"][1]["value"] == "-inf"

    psi = tmp_path / "psi.grid"
    rc, out = run(cli, "polar", "--p", "2.5", "--x", "0.5,0.5,0.5", "--shape", "9,9,9",
                  "--origin", "0,0,0", "--spacing", "0.125", "--output", psi)
    assert rc == 0
    validate(schemas, "polar", json.loads(out))

    ext = tmp_path / "ext.grid"
    rc, out = run(cli, "grid", "extend", "--input", psi, "--output", ext)
    assert rc == 0
    validate(schemas, "extend", json.loads(out))

    rc, out = run(cli, "grid", "upper-conical", "--input", ext, "--x", "0.25,0.25,0.25",
                  "--eps", "0.1", "--hess-bound", "10")
    assert rc == 0
    validate(schemas, "upper_conical", json.loads(out))


def test_solve_and_verify(cli, schemas, examples, tmp_path):
    sol = tmp_path / "sol.grid"
    hist = tmp_path / "history.csv"
    rc, out = run(cli, "solve", "--config", examples / "solve_saddle.json", "--output", sol, "--history", hist)
    assert rc == 0
    validate(schemas, "solve", json.loads(out))
    assert hist.read_text().splitlines()[0] == "iteration,residual_sup"

    rc, out = run(cli, "grid", "harmonic", "--input", sol, "--spec", "pp:2", "--c-tol", "1e-6")
    assert rc == 0
    validate(schemas, "harmonic", json.loads(out))
    rc, out = run(cli, "grid", "verify", "--input", sol, "--spec", "pp:2", "--c-tol", "1e-6")
    assert rc == 0
    validate(schemas, "verify", json.loads(out))


def test_experiments(cli, schemas, examples, tmp_path):
    rc, _ = run(cli, "experiment", "--config", examples / "removability_quadratic.json", "--output", tmp_path / "r")
    assert rc == 0
    validate(schemas, "removability", json.loads((tmp_path / "r" / "report.json").read_text()))

    rc, _ = run(cli, "experiment", "--config", examples / "convergence_k15.json", "--output", tmp_path / "c")
    assert rc == 0
    rep = json.loads((tmp_path / "c" / "report.json").read_text())
    validate(schemas, "convergence", rep)
    assert rep["monotone_decreasing"]

    rc, out = run(cli, "experiment", "--config", examples / "polar_unsupported.json", "--output", tmp_path / "u")
    assert rc == 1
    rep = json.loads(out)
    validate(schemas, "error", rep)
    assert rep["error"] == "unsupported_polar"


def test_usage_errors(cli, schemas):
    rc, _ = run(cli, "cone", "--spec", "sigma:2", "--dim", "4", "--bogus")
    assert rc == 2
    rc, out = run(cli, "cone", "--spec", "nope", "--dim", "3")
    assert rc == 2
    validate(schemas, "error", json.loads(out))


def test_seed_reproducible(cli):
    args = ["check", "monotone", "--f", "branch:2", "--m", "p", "--dim", "3", "--samples", "500", "--seed", "11"]
    assert run(cli, *args) == run(cli, *args)
