import json
import subprocess
import sys

import numpy as np
import pytest

from factorforge import cli, formats, pipeline
from factorforge.basis import compute_basis, load_basis, save_basis
from factorforge.coords import project_batch
from factorforge.sampler import generate_for_category
from factorforge.semantics import load_ranges


def run(capsys, *argv):
    code = cli.dispatch([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def error_of(err):
    lines = err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


@pytest.fixture
def model_dir(tmp_path):
    spec, lab = pipeline.synthetic_model(6, 6, model_seed=2)
    pipeline.save_model(tmp_path / "model", spec, lab)
    return tmp_path / "model"


def test_demo_smoke(tmp_path, capsys):
    out = tmp_path / "report.json"
    code, text, _ = run(capsys, "demo", "--dim", 8, "--seed", 1, "--n", 50, "--out", out)
    assert code == 0
    report = json.loads(out.read_text())
    assert report["seed"] == 1 and len(report["categories"]) == 6
    assert "Label retention" in text


def test_demo_matches_library(tmp_path, capsys):
    out = tmp_path / "report.json"
    run(capsys, "demo", "--dim", 8, "--seed", 3, "--n", 40, "--out", out)
    cfg = pipeline.ExperimentConfig(dim=8, image_dim=8, n_per_category=40, seed=3)
    assert out.read_text() == pipeline.run_comparison(cfg).dumps()


def test_basis_then_project_bitwise(tmp_path, capsys, rng):
    W, L = rng.standard_normal((9, 7)), rng.standard_normal((25, 7))
    formats.write_matrix(tmp_path / "W.fck", W)
    formats.write_matrix(tmp_path / "L.fck", L)
    assert run(capsys, "basis", "--weights", tmp_path / "W.fck", "--k", 4, "--out", tmp_path / "b.fcb")[0] == 0
    assert run(capsys, "project", "--basis", tmp_path / "b.fcb", "--latents", tmp_path / "L.fck",
               "--out", tmp_path / "C.fck")[0] == 0
    lib_basis = compute_basis(W, 4)
    assert load_basis(tmp_path / "b.fcb").same_as(lib_basis)
    C = formats.read_matrix(tmp_path / "C.fck")
    assert C.tobytes() == project_batch(lib_basis, L).tobytes()


def test_full_stage_chain(tmp_path, capsys, model_dir):
    cfg = model_dir / "model.json"
    code, out, _ = run(capsys, "baseline", "--config", cfg, "--n", 30, "--seed", 4, "--out", tmp_path / "base.fck")
    assert code == 0
    summary = json.loads(out)
    assert summary["labels"] == str(tmp_path / "base.labels.json")
    assert run(capsys, "basis", "--weights", model_dir / "mapping.fck", "--out", tmp_path / "b.fcb")[0] == 0
    assert run(capsys, "project", "--basis", tmp_path / "b.fcb", "--latents", tmp_path / "base.fck",
               "--out", tmp_path / "coords.fck")[0] == 0
    assert run(capsys, "ranges", "--coords", tmp_path / "coords.fck", "--labels", tmp_path / "base.labels.json",
               "--out", tmp_path / "r.json")[0] == 0
    assert run(capsys, "sample", "--ranges", tmp_path / "r.json", "--basis", tmp_path / "b.fcb",
               "--category", "male_old", "--n", 64, "--seed", 4, "--out", tmp_path / "ours.fck")[0] == 0
    code, out, _ = run(capsys, "evaluate", "--config", cfg, "--latents", tmp_path / "ours.fck",
                       "--category", "male_old", "--out", tmp_path / "eval.json")
    assert code == 0
    result = json.loads((tmp_path / "eval.json").read_text())
    assert result == json.loads(out)

    # every stage agrees with the library bitwise
    spec, lab = pipeline.load_model(cfg)
    base = pipeline.baseline_collect(spec, lab, 30, 4, 10**6)
    assert formats.read_matrix(tmp_path / "base.fck").tobytes() == base.stacked().tobytes()
    basis = compute_basis(spec.mapping)
    ours = generate_for_category(load_ranges(tmp_path / "r.json"), basis, 5, 64, 4)
    assert formats.read_matrix(tmp_path / "ours.fck").tobytes() == ours.tobytes()
    assert result["retention"] == pipeline.retention_rate(ours, spec, lab, 5)
    assert result["diversity"] == pipeline.mean_pairwise_distance(spec.render(ours))


def test_sample_unknown_category(tmp_path, capsys):
    (tmp_path / "r.json").write_text(json.dumps(
        {"k": 1, "categories": [{"index": 0, "name": "female_young", "count": 1, "min": [0.0], "max": [1.0]}]}
    ))
    b = compute_basis(np.eye(1))
    save_basis(tmp_path / "b.fcb", b)
    for name in ("nonexistent", "male_old"):
        code, _, err = run(capsys, "sample", "--ranges", tmp_path / "r.json", "--basis", tmp_path / "b.fcb",
                           "--category", name, "--n", 3, "--out", tmp_path / "s.fck")
        assert code == 1
        assert error_of(err)["error"] == "empty-category"
    assert not (tmp_path / "s.fck").exists()


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["demo", "--bogus"], ["basis", "--weights", "x"],
                                  ["demo", "--dim", "eight"]])
def test_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert error_of(err)["error"] == "usage"


def test_missing_input(tmp_path, capsys):
    code, _, err = run(capsys, "basis", "--weights", tmp_path / "none.fck", "--out", tmp_path / "b.fcb")
    assert code == 1 and error_of(err)["error"] == "invalid-argument"


def test_corrupt_input(tmp_path, capsys):
    (tmp_path / "W.fck").write_bytes(b"XXXX" + bytes(8))
    code, _, err = run(capsys, "basis", "--weights", tmp_path / "W.fck", "--out", tmp_path / "b.fcb")
    assert code == 1 and error_of(err)["error"] == "format"


def test_bad_k(tmp_path, capsys):
    formats.write_matrix(tmp_path / "W.fck", np.eye(3))
    code, _, err = run(capsys, "basis", "--weights", tmp_path / "W.fck", "--k", 9, "--out", tmp_path / "b.fcb")
    assert code == 1 and error_of(err)["error"] == "invalid-argument"
    assert not (tmp_path / "b.fcb").exists()


def test_budget_exhausted(tmp_path, capsys, model_dir):
    code, _, err = run(capsys, "baseline", "--config", model_dir / "model.json", "--n", 50,
                       "--max-draws", 60, "--out", tmp_path / "b.fck")
    assert code == 1 and error_of(err)["error"] == "budget-exhausted"
    assert list(tmp_path.glob("b*")) == []


def test_outputs_atomic_and_rerun_identical(tmp_path, capsys, rng):
    formats.write_matrix(tmp_path / "W.fck", rng.standard_normal((5, 5)))
    before = (tmp_path / "W.fck").read_bytes()
    run(capsys, "basis", "--weights", tmp_path / "W.fck", "--out", tmp_path / "b.fcb")
    first = (tmp_path / "b.fcb").read_bytes()
    run(capsys, "basis", "--weights", tmp_path / "W.fck", "--out", tmp_path / "b.fcb")
    assert (tmp_path / "b.fcb").read_bytes() == first
    assert (tmp_path / "W.fck").read_bytes() == before
    assert sorted(p.name for p in tmp_path.iterdir()) == ["W.fck", "b.fcb"]


def test_bad_thread_env(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("FACTORFORGE_THREADS", "-2")
    code, _, err = run(capsys, "demo", "--dim", 4, "--n", 5, "--out", tmp_path / "r.json")
    assert code == 1 and error_of(err)["error"] == "invalid-argument"


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "factorforge", "demo", "--dim", "4", "--n", "10", "--out", str(tmp_path / "r.json")],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "r.json").exists()
