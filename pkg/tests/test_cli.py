import json

import numpy as np
import pytest

from walshlab.cli import BASIS_HEADER, SIGN_HEADER, TENSOR_HEADER, fmt, run_command
from walshlab.linalg import matrix_from_json


def run(capsys, *argv):
    code = run_command(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gen_walsh_stdout_identity(capsys):
    code, out, _ = run(capsys, "gen-walsh", "--index", "0", "--level", "2")
    assert code == 0
    payload = json.loads(out)
    assert payload["m"] == 2
    assert np.array_equal(matrix_from_json(payload), np.eye(4))


def test_gen_walsh_writes_file_and_manifest(tmp_path, capsys):
    out_path = tmp_path / "w5.json"
    code, _, _ = run(
        capsys, "gen-walsh", "--index", "5", "--level", "2", "--out", str(out_path)
    )
    assert code == 0
    mat = matrix_from_json(json.loads(out_path.read_text()))
    assert np.array_equal(mat, np.diag([1.0, -1.0, -1.0, 1.0]))
    manifest = json.loads((tmp_path / "w5.json.manifest.json").read_text())
    assert manifest["tool_version"]
    assert manifest["argv"][0] == "gen-walsh"
    assert str(out_path) in manifest["outputs"]


def test_norm_of_walsh_matrix_is_one(tmp_path, capsys):
    out_path = tmp_path / "w1.json"
    run(capsys, "gen-walsh", "--index", "1", "--level", "1", "--out", str(out_path))
    code, out, _ = run(capsys, "norm", "--in", str(out_path), "--p", "2", "--alpha", "0.3")
    assert code == 0
    assert abs(float(out.strip()) - 1.0) < 1e-12


def test_coeffs_roundtrip(tmp_path, capsys):
    out_path = tmp_path / "w3.json"
    run(capsys, "gen-walsh", "--index", "3", "--level", "1", "--out", str(out_path))
    code, out, _ = run(capsys, "coeffs", "--in", str(out_path))
    assert code == 0
    payload = json.loads(out)
    assert payload["m"] == 1
    coeffs = np.asarray(payload["re"]) + 1j * np.asarray(payload["im"])
    assert np.allclose(coeffs, [0, 0, 0, 1])


def test_verify_suites_pass(capsys):
    assert run(capsys, "verify", "--suite", "walsh", "--level", "2", "--alpha", "0.5")[0] == 0
    assert run(capsys, "verify", "--suite", "expectations", "--level", "2", "--alpha", "0.3")[0] == 0
    assert run(capsys, "verify", "--suite", "blocks", "--level", "2", "--alpha", "0.5")[0] == 0


def test_verify_identity_tracial_asserts(capsys):
    code, out, _ = run(
        capsys, "verify", "--suite", "identity", "--level", "2", "--alpha", "0.5",
        "--tol", "1e-12",
    )
    assert code == 0
    assert "PASS" in out


def test_verify_identity_biased_reports_without_failing(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "identity", "--level", "2", "--alpha", "0.3")
    assert code == 0
    assert "REPORT" in out
    assert "FAIL" not in out
    # the two documented residual probes appear with the derived value 0.4
    for line in out.splitlines():
        if "residual[x=w1,n=0]" in line or "residual[x=w4,n=1]" in line:
            assert abs(float(line.split("value=")[1]) - 0.4) < 1e-10


def test_basis_constants_csv_schema(tmp_path, capsys):
    out_path = tmp_path / "bc.csv"
    code, _, _ = run(
        capsys, "basis-constants", "--level", "1", "--alpha", "0.5", "--p", "2",
        "--method", "exact2", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == BASIS_HEADER
    assert len(lines) == 5
    for line in lines[1:]:
        value = float(line.split(",")[5])
        assert abs(value - 1) < 1e-10


def test_basis_constants_estimate_requires_seed(tmp_path, capsys):
    code, _, err = run(
        capsys, "basis-constants", "--level", "1", "--alpha", "0.5", "--p", "2",
        "--method", "estimate", "--out", str(tmp_path / "x.csv"),
    )
    assert code == 2
    assert "--seed" in err


def test_unconditionality_csv_schema(tmp_path, capsys):
    out_path = tmp_path / "uc.csv"
    code, _, _ = run(
        capsys, "unconditionality", "--level", "2", "--alpha", "0.3", "--p", "2",
        "--mode", "exhaustive", "--trials", "50", "--seed", "4", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == SIGN_HEADER
    ratio = float(lines[1].split(",")[-1])
    assert abs(ratio - 1) < 1e-8


def test_tensor_sweep_csv_schema(tmp_path, capsys):
    out_path = tmp_path / "ts.csv"
    code, _, _ = run(
        capsys, "tensor-sweep", "--level", "1", "--level2", "1", "--alpha", "0.5",
        "--alpha2", "0.5", "--p", "2", "--nmax", "15", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == TENSOR_HEADER
    assert len(lines) == 17
    for line in lines[1:]:
        assert abs(float(line.split(",")[-1]) - 1) < 1e-10


def test_classical_csv_schema(tmp_path, capsys):
    out_path = tmp_path / "cl.csv"
    code, _, _ = run(
        capsys, "classical", "--level", "3", "--alpha", "0.5", "--p", "2",
        "--nmax", "7", "--out", str(out_path),
    )
    assert code == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == BASIS_HEADER
    for line in lines[1:]:
        assert abs(float(line.split(",")[5]) - 1) < 1e-10


def test_unknown_command_and_flags_exit_2(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "gen-walsh", "--index", "0", "--level", "2", "--bogus")[0] == 2


def test_invalid_parameter_ranges_exit_2(capsys):
    code, _, err = run(capsys, "verify", "--suite", "walsh", "--level", "2", "--alpha", "0.7")
    assert code == 2
    assert "alpha" in err or "bias" in err
    code, _, err = run(
        capsys, "norm", "--in", "/nonexistent.json", "--p", "2", "--alpha", "0.3"
    )
    assert code == 2


def test_csv_reproducible_across_runs_and_workers(tmp_path, capsys):
    base = [
        "basis-constants", "--level", "1", "--alpha", "0.3", "--p", "3",
        "--method", "estimate", "--restarts", "4", "--seed", "11",
    ]
    paths = []
    for tag, workers in (("a", "1"), ("b", "4"), ("c", "1")):
        out_path = tmp_path / f"{tag}.csv"
        code, _, _ = run(capsys, *base, "--workers", workers, "--out", str(out_path))
        assert code == 0
        paths.append(out_path)
    bodies = [p.read_bytes() for p in paths]
    assert bodies[0] == bodies[1] == bodies[2]


def test_rerun_from_manifest_is_byte_identical(tmp_path, capsys):
    out_path = tmp_path / "uc.csv"
    argv = [
        "unconditionality", "--level", "2", "--alpha", "0.3", "--p", "4",
        "--mode", "sampled", "--trials", "64", "--seed", "9", "--out", str(out_path),
    ]
    assert run(capsys, *argv)[0] == 0
    body_one = out_path.read_bytes()
    manifest = json.loads((tmp_path / "uc.csv.manifest.json").read_text())
    assert run(capsys, *manifest["argv"])[0] == 0
    assert out_path.read_bytes() == body_one


def test_fmt_17_digits():
    assert fmt(0.3) == "0.29999999999999999"
    assert fmt(1.0) == "1"
    assert fmt(float("inf")) == "inf"
    assert fmt(True) == "true"
