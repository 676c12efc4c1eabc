import csv
import json
from pathlib import Path

import pytest

from pdnls.cli import EXIT_CHECK, EXIT_CONFIG, EXIT_INTEGRITY, EXIT_OK, main
from pdnls.fields.io import sha256_file

CONFIGS = Path(__file__).resolve().parents[1] / "configs"

RADIAL_SOLVE = """
seed = 0
eps = [1e-2, 5e-3]
classes = ["radial"]

[params]
d = 2
p = 3.0
"""


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def manifest(out):
    return json.loads((Path(out) / "manifest.json").read_text())


@pytest.fixture(scope="module")
def solved(tmp_path_factory):
    root = tmp_path_factory.mktemp("solve")
    cfg = write(root, RADIAL_SOLVE)
    out = root / "out"
    assert main(["solve", "--config", cfg, "--out", str(out)]) == EXIT_OK
    return cfg, out


# --------------------------------------------------------------------------- symbol-check


def test_symbol_check_biharmonic_passes(tmp_path):
    code = main(["symbol-check", "--config", str(CONFIGS / "symbol_check.toml"), "--out", str(tmp_path)])
    assert code == EXIT_OK
    assert json.loads((tmp_path / "admissibility.json").read_text())["pass"] is True


def test_symbol_check_gamma_mismatch_fails(tmp_path):
    code = main(["symbol-check", "--config", str(CONFIGS / "symbol_check_mismatch.toml"),
                 "--out", str(tmp_path)])
    assert code == EXIT_CHECK
    rep = json.loads((tmp_path / "admissibility.json").read_text())
    assert rep["failed_bounds"] == ["shell"]
    assert manifest(tmp_path)["exit_code"] == EXIT_CHECK


# --------------------------------------------------------------------------- configuration errors


@pytest.mark.parametrize("text, needle", [
    ("[params\nd = 2", "not valid TOML"),
    ("[params]\nd = 2\np = 3.0\n[extras]\nx = 1", "unknown config keys"),
    ("[params]\nd = 2\np = 1.5", "p > 2"),
    ("classes = ['G9']\n[params]\nd = 2\np = 3.0", "unknown classes"),
    ("eps = [2.0]\n[params]\nd = 2\np = 3.0", "(0, 1)"),
    ("classes = ['Gk']\n[params]\nd = 2\np = 3.0", "params.k"),
    ("[params]\nd = 2\np = 3.0\n[diagnostics]\nroughness_t = 3", "roughness_t"),
])
def test_malformed_config_exits_2(tmp_path, capsys, text, needle):
    code = main(["solve", "--config", write(tmp_path, text), "--out", str(tmp_path / "out")])
    assert code == EXIT_CONFIG
    assert needle in capsys.readouterr().err


def test_missing_config_file_exits_2(tmp_path):
    assert main(["solve", "--config", str(tmp_path / "none.toml"), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_eps_floor_can_empty_the_run(tmp_path):
    code = main(["solve", "--config", write(tmp_path, RADIAL_SOLVE), "--out", str(tmp_path / "o"),
                 "--eps-floor", "0.5"])
    assert code == EXIT_CONFIG


# --------------------------------------------------------------------------- solve, manifest, determinism


def test_solve_outputs_and_manifest(solved):
    _, out = solved
    man = manifest(out)
    assert man["command"] == "solve" and man["exit_code"] == EXIT_OK
    assert man["config"]["eps"] == [1e-2, 5e-3]
    listed = {f["path"]: f["sha256"] for f in man["files"]}
    assert "solve.csv" in listed
    assert len([p for p in listed if p.startswith("results/")]) == 2
    assert len([p for p in listed if p.startswith("fields/")]) == 4
    for path, digest in listed.items():
        assert sha256_file(out / path) == digest
    assert [t["status"] for t in man["tasks"]] == ["converged", "converged"]
    with open(out / "solve.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[1]["rayleigh"]) < float(rows[0]["rayleigh"])


def test_same_config_and_seed_give_identical_files(solved, tmp_path):
    cfg, out = solved
    assert main(["solve", "--config", cfg, "--out", str(tmp_path)]) == EXIT_OK
    first = {f["path"]: f["sha256"] for f in manifest(out)["files"]}
    second = {f["path"]: f["sha256"] for f in manifest(tmp_path)["files"]}
    assert first == second
    assert (out / "solve.csv").read_bytes() == (tmp_path / "solve.csv").read_bytes()


# --------------------------------------------------------------------------- diagnose


def test_diagnose_radial_roughness_is_one(solved, tmp_path):
    _, out = solved
    results = sorted(str(p) for p in (out / "results").glob("*.json"))
    code = main(["diagnose", "--config", str(CONFIGS / "diagnose_d2.toml"), "--out", str(tmp_path), *results])
    assert code == EXIT_OK
    growth = json.loads((tmp_path / "diagnose" / "growth.json").read_text())
    assert growth["radial"]["growth_factor"] == pytest.approx(1.0, abs=1e-10)
    with open(tmp_path / "diagnose" / "summary.csv") as fh:
        assert all(float(r["sup_ratio"]) == pytest.approx(1.0, abs=1e-10) for r in csv.DictReader(fh))


def test_diagnose_detects_tampered_field(solved, tmp_path):
    _, out = solved
    copy = tmp_path / "copy"
    for sub in ("results", "fields"):
        (copy / sub).mkdir(parents=True)
        for f in (out / sub).iterdir():
            (copy / sub / f.name).write_bytes(f.read_bytes())
    result = sorted((copy / "results").glob("*.json"))[0]
    field = copy / json.loads(result.read_text())["field"]["json"]
    field.write_text(field.read_text().replace('"eps"', '"eps" ', 1))
    code = main(["diagnose", "--config", str(CONFIGS / "diagnose_d2.toml"), "--out", str(tmp_path / "d"),
                 str(result)])
    assert code == EXIT_INTEGRITY


def test_diagnose_detects_tampered_result(solved, tmp_path):
    _, out = solved
    copy = tmp_path / "copy"
    for sub in ("results", "fields"):
        (copy / sub).mkdir(parents=True)
        for f in (out / sub).iterdir():
            (copy / sub / f.name).write_bytes(f.read_bytes())
    result = sorted((copy / "results").glob("*.json"))[0]
    doc = json.loads(result.read_text())
    doc["config"]["seed"] = 17
    result.write_text(json.dumps(doc))
    code = main(["diagnose", "--config", str(CONFIGS / "diagnose_d2.toml"), "--out", str(tmp_path / "d"),
                 str(result)])
    assert code == EXIT_INTEGRITY


def test_diagnose_without_results_is_config_error(tmp_path):
    code = main(["diagnose", "--config", str(CONFIGS / "diagnose_d2.toml"), "--out", str(tmp_path)])
    assert code == EXIT_CONFIG


# --------------------------------------------------------------------------- trial and interp-check


def test_trial_critical_reports_log_factor(tmp_path):
    code = main(["trial", "--config", str(CONFIGS / "trial_critical.toml"), "--out", str(tmp_path)])
    assert code == EXIT_OK
    with open(tmp_path / "lemma_checks.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3
    assert all(float(r["log_factor"]) > 1 for r in rows)


def test_interp_check_single_k(tmp_path):
    code = main(["interp-check", "--config", str(CONFIGS / "interp.toml"), "--out", str(tmp_path)])
    assert code == EXIT_OK
    verdict = json.loads((tmp_path / "interp_verdict.json").read_text())
    assert verdict["n"] == 100 and verdict["single_K_pass"] and verdict["layer_cake_pass"]
    assert verdict["K_observed"] <= verdict["K_explicit"]


def test_interp_check_without_config(tmp_path):
    assert main(["interp-check", "--out", str(tmp_path)]) == EXIT_OK
