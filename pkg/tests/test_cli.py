import json

import numpy as np
import pytest

from nilmoduli import algebra as al
from nilmoduli import cli


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_describe_h9(capsys):
    code, out, _ = run_cli(capsys, "describe", "h9")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == "nilmoduli/1"
    assert rep["outputs"]["nilpotency_step"] == 3
    assert rep["outputs"]["derivation_dimension"] == 15
    assert rep["outputs"]["component_count"] == 8


def test_describe_abelian_string(capsys):
    code, out, _ = run_cli(capsys, "describe", "(0,0,0,0,0,0)")
    assert code == 0
    rep = json.loads(out)
    assert rep["outputs"]["nilpotency_step"] == 1
    assert rep["outputs"]["brackets"] == []


def test_describe_h6(capsys):
    code, out, _ = run_cli(capsys, "describe", "h6")
    rep = json.loads(out)
    assert rep["outputs"]["derivation_dimension"] == 19


def test_describe_parse_error_exit_code(capsys):
    code, _, err = run_cli(capsys, "describe", "(0,0,0,0,0,99)")
    assert code == 2
    assert "parse" in err.lower() or "range" in err.lower()


def test_canonicalize_identity(capsys):
    metric = {"algebra": "h6", "matrix": np.eye(6).tolist()}
    code, out, _ = run_cli(capsys, "canonicalize", "--metric", json.dumps(metric))
    assert code == 0
    rep = json.loads(out)
    assert rep["outputs"]["form"] == {"tag": "h6", "a": 1.0, "b": 1.0}


def test_canonicalize_h6_swap(capsys):
    metric = {"algebra": "h6", "matrix": np.diag([1, 1, 1, 1, 3.0, 2.0]).tolist()}
    code, out, _ = run_cli(capsys, "canonicalize", "--metric", json.dumps(metric))
    rep = json.loads(out)
    assert rep["outputs"]["form"]["a"] == pytest.approx(2.0)
    assert rep["outputs"]["form"]["b"] == pytest.approx(3.0)


def test_canonicalize_orbit_round_trip(capsys):
    from nilmoduli import automorphisms as au
    from nilmoduli import moduli as mo

    form = mo.H4Form(0.6, 1.1, 0.2, 1.7)
    g = mo.pullback_metric(mo.realize(form), au.random_automorphism("h4", 3))
    metric = {"algebra": "h4", "matrix": g.matrix.tolist()}
    code, out, _ = run_cli(capsys, "canonicalize", "--metric", json.dumps(metric))
    rep = json.loads(out)
    assert rep["outputs"]["form"]["r"] == pytest.approx(0.6, abs=1e-8)
    assert rep["outputs"]["witness"]["residual"] <= 1e-8


def test_canonicalize_not_spd_exit(capsys):
    metric = {"algebra": "h6", "matrix": np.diag([1, 1, 1, 1, 1, -1.0]).tolist()}
    code, _, err = run_cli(capsys, "canonicalize", "--metric", json.dumps(metric))
    assert code == 3


def test_canonicalize_input_file(tmp_path, capsys):
    path = tmp_path / "metric.json"
    path.write_text(json.dumps({"algebra": "h5", "matrix": np.eye(6).tolist()}))
    code, out, _ = run_cli(capsys, "canonicalize", "--input", str(path))
    assert code == 0
    rep = json.loads(out)
    assert rep["outputs"]["form"]["tag"] == "h5"


def test_isometry_command(capsys):
    code, out, _ = run_cli(
        capsys, "isometry", "--algebra", "h9hat",
        "--form", '{"A":1.0,"B":1.0,"C":1.0,"D":0.0,"E":0.0,"F":0.0}',
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["outputs"]["descriptor"]["name"] == "Z2 x Z2 x Z2"
    assert rep["outputs"]["descriptor"]["finite_order"] == 8
    assert rep["outputs"]["verification"]["passed"]


def test_isometry_invalid_form_exit(capsys):
    code, _, err = run_cli(capsys, "isometry", "--algebra", "h6", "--form",
                           '{"a": 3.0, "b": 1.0}')
    assert code == 2


def test_hermitian_sphere_case(capsys):
    code, out, _ = run_cli(
        capsys, "hermitian", "--algebra", "h5",
        "--form", '{"r":1.0,"s":1.0,"E":1.0,"F":0.3,"G":2.0}',
    )
    rep = json.loads(out)
    assert rep["outputs"]["solutions"]["J2"]["kind"] == "sphere"


def test_hermitian_h4_r1(capsys):
    code, out, _ = run_cli(
        capsys, "hermitian", "--algebra", "h4",
        "--form", '{"r":1.0,"a":1.0,"b":0.4,"c":2.0}',
    )
    rep = json.loads(out)
    tri = sorted(s["a"] for s in rep["outputs"]["solutions"]["J2"]["solutions"])
    assert tri == [-1.0, 1.0]


def test_hermitian_search_none(capsys):
    code, out, _ = run_cli(
        capsys, "hermitian", "--algebra", "h9hat",
        "--form", '{"A":1.0,"B":2.0,"C":1.0,"D":0.0,"E":0.0,"F":0.0}',
        "--search", "--budget", "16",
    )
    assert code == 0
    rep = json.loads(out)
    assert rep["outputs"]["search"]["found"] is False
    assert rep["outputs"]["search"]["residual"] > 1e-3


def test_tables_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "tables")
    code2, out2, _ = run_cli(capsys, "tables")
    assert code1 == code2 == 0
    assert out1 == out2  # byte-identical
    rep = json.loads(out1)
    assert len(rep["outputs"]["isometry"]["h5"]) == 10
    assert len(rep["outputs"]["isometry"]["h2"]) == 8
    assert len(rep["outputs"]["h6_hermitian"]) == 3


def test_verify_suites_pass(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "algebra", "--seed", "0")
    assert code == 0
    rep = json.loads(out)
    assert rep["passed"] is True


def test_verify_moduli_seeded(capsys, monkeypatch):
    monkeypatch.setenv("NILMODULI_SEED", "7")
    code, out, _ = run_cli(capsys, "verify", "--suite", "moduli")
    assert code == 0
    rep = json.loads(out)
    assert rep["inputs"]["seed"] == 7
    assert rep["outputs"]["moduli"]["checked"] >= 500


def test_verify_detects_corrupted_build():
    # a moved structure constant kills the Jacobi gate -> nonzero exit
    h9 = al.builtin("h9")
    c = h9.c.copy()
    c[5, 3, 4] += 1.0
    c[5, 4, 3] -= 1.0
    corrupted = al.LieAlgebra(c=c, label="h9")
    checked, failures = cli.verify_suite_algebra(0, algebras=[corrupted])
    assert failures


def test_text_format(capsys):
    code, out, _ = run_cli(capsys, "--format", "text", "describe", "h2")
    assert code == 0
    assert "nilpotency step: 2" in out


def test_shrink_failure_helper():
    # check(x) passes for x <= 0.5 on the segment from 0 to 1; the shrunk
    # failing point should sit just above the pass/fail boundary
    base, bad = np.zeros(1), np.ones(1)
    shrunk = cli._shrink_failure(lambda x: float(x[0]) <= 0.5, base, bad)
    assert 0.5 < float(shrunk[0]) < 0.51
