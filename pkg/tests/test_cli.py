"""Golden-file tests for the command line.

Set NCFLAT_REGEN_GOLDEN=1 to rewrite the expected files after an intended change.
"""

import json
import os
from pathlib import Path

import pytest
from click.testing import CliRunner

from ncflat import __version__
from ncflat.cli import main

GOLDEN = Path(__file__).parent / "golden"
EXPECTED = GOLDEN / "expected"
REGEN = os.environ.get("NCFLAT_REGEN_GOLDEN") == "1"

# name, argv (run inside tests/golden), exit code, write a JSON report
CASES = [
    ("validate_mat2", ["validate", "mat2_preset.json"], 0, True),
    ("validate_corrupt", ["validate", "corrupt_algebra.json"], 1, True),
    ("validate_malformed", ["validate", "malformed.json"], 2, False),
    ("verify_regular_dual_all", ["verify", "regular_dual.json", "--suite", "all"], 0, True),
    ("verify_example_mat2_thm24", ["verify", "example_mat2.json", "--suite", "thm24"], 0, True),
    ("verify_perturbed_lemma21", ["verify", "perturbed_mat2.json", "--suite", "lemma21"], 1, True),
    ("verify_perturbed_tensor", ["verify", "perturbed_mat2.json", "--suite", "tensor"], 0, True),
    ("verify_missing_module", ["verify", "missing_module.json"], 2, False),
    ("solve_residue", ["solve", "residue_dual.json", "--target", "connection", "--module", "residue"], 1, False),
    ("solve_regular", ["solve", "residue_dual.json", "--target", "connection", "--module", "A"], 0, False),
    ("solve_unknown_module", ["solve", "residue_dual.json", "--target", "connection", "--module", "B"], 2, False),
    ("random_mat2_seed7", ["random", "--algebra", "mat2", "--vdim", "1", "--seed", "7"], 0, False),
    ("random_dual_fp", ["random", "--algebra", "dual_numbers", "--vdim", "2", "--seed", "3", "--prime", "7"], 0, False),
    ("random_vdim0", ["random", "--algebra", "mat2", "--vdim", "0", "--seed", "7"], 2, False),
    ("dga_prod_kk", ["dga", "--algebra", "prod_KK"], 0, True),
    ("hom_mat2_row", ["hom", "mat2_preset.json", "--module", "row", "--budget", "30"], 0, True),
]


def _run(args, tmp_path, report):
    runner = CliRunner()
    argv = list(args)
    if report:
        argv += ["--json", str(tmp_path / "report.json")]
    cwd = os.getcwd()
    os.chdir(GOLDEN)
    try:
        result = runner.invoke(main, argv, catch_exceptions=False, prog_name="ncflat")
    finally:
        os.chdir(cwd)
    text = (tmp_path / "report.json").read_text() if report else None
    return result, text


def _check_golden(path: Path, actual: str):
    if REGEN:
        path.parent.mkdir(exist_ok=True)
        path.write_text(actual)
    assert path.exists(), f"missing golden file {path.name}; rerun with NCFLAT_REGEN_GOLDEN=1"
    assert actual == path.read_text()


@pytest.mark.parametrize("name,args,code,report", CASES, ids=[c[0] for c in CASES])
def test_golden(name, args, code, report, tmp_path):
    result, text = _run(args, tmp_path, report)
    assert result.exit_code == code, result.output
    _check_golden(EXPECTED / f"{name}.out", result.output)
    if report:
        _check_golden(EXPECTED / f"{name}.report.json", text)


@pytest.mark.parametrize("name,args,code,report", [c for c in CASES if c[3]], ids=[c[0] for c in CASES if c[3]])
def test_reports_are_deterministic(name, args, code, report, tmp_path):
    _, first = _run(args, tmp_path, True)
    _, second = _run(args, tmp_path, True)
    assert first == second
    doc = json.loads(first)
    assert doc["version"] == __version__ and len(doc["input_digest"]) == 64
    s = doc["summary"]
    assert (s["fail"] == 0) == (code == 0)


def test_corrupt_algebra_names_triple(tmp_path):
    _, text = _run(["validate", "corrupt_algebra.json"], tmp_path, True)
    (chk,) = json.loads(text)["checks"]
    assert chk["status"] == "fail" and len(chk["witness"]["triple"]) == 3


def test_perturbed_lemma21_witness(tmp_path):
    _, text = _run(["verify", "perturbed_mat2.json", "--suite", "lemma21"], tmp_path, True)
    fails = [c for c in json.loads(text)["checks"] if c["status"] == "fail"]
    assert fails and all(c["id"].startswith("[bent] right_assoc") for c in fails)
    assert all(len(c["witness"]["triple"]) == 3 for c in fails)


def test_random_is_byte_identical(tmp_path):
    a, _ = _run(["random", "--algebra", "upper_tri_2", "--vdim", "2", "--seed", "99"], tmp_path, False)
    b, _ = _run(["random", "--algebra", "upper_tri_2", "--vdim", "2", "--seed", "99"], tmp_path, False)
    assert a.output == b.output


@pytest.mark.parametrize("alg", ["field", "dual_numbers", "group_C2", "prod_KK", "trunc_poly_3", "upper_tri_2"])
@pytest.mark.parametrize("seed", [0, 1])
def test_random_instances_pass_suite_all(alg, seed, tmp_path):
    out = tmp_path / "r.json"
    runner = CliRunner()
    r = runner.invoke(main, ["random", "--algebra", alg, "--vdim", "1", "--seed", str(seed), "-o", str(out)])
    assert r.exit_code == 0
    r = runner.invoke(main, ["verify", str(out), "--suite", "all"])
    assert r.exit_code == 0, r.output


def test_solve_output_reverifies(tmp_path):
    runner = CliRunner()
    out = tmp_path / "s.json"
    r = runner.invoke(main, ["solve", str(GOLDEN / "residue_dual.json"), "--target", "connection", "--module", "A", "-o", str(out)])
    assert r.exit_code == 0 and "family dimension" in r.output
    r = runner.invoke(main, ["verify", str(out), "--suite", "connection"])
    assert r.exit_code == 0, r.output
    # the hom side on the right regular module
    doc = json.loads(out.read_text())
    doc["modules"]["Ar"] = {"preset": "regular_right"}
    out.write_text(json.dumps(doc))
    out2 = tmp_path / "s2.json"
    r = runner.invoke(main, ["solve", str(out), "--target", "homconnection", "--module", "Ar", "-o", str(out2)])
    assert r.exit_code == 0
    r = runner.invoke(main, ["verify", str(out2), "--suite", "hom"])
    assert r.exit_code == 0, r.output


def test_degree_cap_env(tmp_path, monkeypatch):
    monkeypatch.setenv("NCFLAT_DEGREE_CAP", "1")
    r = CliRunner().invoke(main, ["verify", str(GOLDEN / "regular_dual.json"), "--suite", "thm24"])
    assert r.exit_code == 2 and "degree cap" in r.output


def test_version_flag():
    r = CliRunner().invoke(main, ["--version"])
    assert __version__ in r.output
