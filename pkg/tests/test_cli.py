"""CLI surface: exit codes, output shapes, run smoke, ledger verification."""

import json

import pytest

from envforge.cli import dispatch
from envforge.mocks import mock_env


@pytest.fixture
def artifact_file(tmp_path):
    artifact = mock_env("faithful_sorter")
    path = tmp_path / "artifact.json"
    path.write_text(json.dumps(artifact.to_dict()))
    return path


def test_unknown_subcommand_exits_64(capsys):
    assert dispatch(["definitely-not-a-command"]) == 64


def test_no_subcommand_exits_64(capsys):
    assert dispatch([]) == 64


def test_validate_good_artifact_exits_zero(artifact_file, capsys):
    code = dispatch(["validate", str(artifact_file)])
    out = capsys.readouterr().out
    assert code == 0
    assert "level 5" in out
    assert (artifact_file.parent / (artifact_file.name + ".report.json")).exists()


def test_validate_exit_code_is_five_minus_level(tmp_path, capsys):
    artifact = mock_env("constant_output")
    path = tmp_path / "const.json"
    path.write_text(json.dumps(artifact.to_dict()))
    assert dispatch(["validate", str(path)]) == 2  # level 3


def test_validate_json_output(artifact_file, capsys):
    dispatch(["--json", "validate", str(artifact_file)])
    payload = json.loads(capsys.readouterr().out)
    assert payload["level"] == 5


def test_calibrate_scripted_solver(artifact_file, capsys):
    code = dispatch(["--json", "calibrate", str(artifact_file),
                     "--solver", "scripted:p=1.0", "-m", "4"])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["empirical_accuracy"] == 1.0
    assert payload["m_effective"] == 4


def test_calibrate_rejects_bad_solver_spec(artifact_file, capsys):
    assert dispatch(["calibrate", str(artifact_file), "--solver", "wat:"]) == 1


def test_audit_review_grid(tmp_path, capsys):
    labels = tmp_path / "labels.tsv"
    rows = ["# env\ttruth\tv1\tv2\tv3"]
    rows += ["e1\t1\t1\t0\t0", "e2\t0\t0\t0\t0", "e3\t1\t1\t1\t0", "e4\t0\t1\t0\t0"]
    labels.write_text("\n".join(rows) + "\n")
    code = dispatch(["--json", "audit-review", str(labels)])
    assert code == 0
    payload = json.loads(capsys.readouterr().out)
    assert set(payload) == {"single", "majority", "any_reject", "all_reject"}
    # any_reject flags e1, e3, e4 -> TP 2, FP 1, TN 1, FN 0
    assert payload["any_reject"]["confusion"] == [2, 1, 1, 0]


def test_run_and_ledger_and_export(tmp_path, capsys):
    config = {
        "run_seed": 3,
        "loop": {"generator_prompts_per_step": 2, "generator_group_size": 2,
                 "solver_batch": 3, "solver_group_size": 2, "steps": 2,
                 "fewshot_k": 2},
        "validation": {"seeds_per_layer": 2, "difficulties_probed": [1, 2],
                       "determinism_repeats": 1},
    }
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps(config))
    run_dir = tmp_path / "run"
    code = dispatch(["--json", "run", "--config", str(config_path),
                     "--run-dir", str(run_dir)])
    out = json.loads(capsys.readouterr().out)
    assert code == 0
    assert out["steps"] == 2
    assert (run_dir / "ledger.jsonl").exists()
    assert (run_dir / "metrics.csv").exists()
    assert (run_dir / "pool_manifest.json").exists()
    assert (run_dir / "trainer_metadata.json").exists()
    assert (run_dir / "batches" / "step-0001.jsonl").exists()

    assert dispatch(["ledger", "verify", str(run_dir / "ledger.jsonl")]) == 0

    # pool inspection and rotation over the persisted manifest
    manifest = run_dir / "pool_manifest.json"
    assert dispatch(["pool", "show", "--manifest", str(manifest)]) == 0
    assert dispatch(["pool", "rotate", "--manifest", str(manifest), "--at-step", "10"]) == 0
    assert dispatch(["pool", "export", "--manifest", str(manifest),
                     "-o", str(tmp_path / "manifest-copy.json")]) == 0
    assert (tmp_path / "manifest-copy.json").exists()

    # repackaging batch files
    out_file = tmp_path / "combined.jsonl"
    assert dispatch(["export-batches", str(run_dir), "-o", str(out_file)]) == 0
    combined = out_file.read_text().splitlines()
    step_rows = sum(
        len((run_dir / "batches" / f"step-000{i}.jsonl").read_text().splitlines())
        for i in (1, 2)
    )
    assert len(combined) == step_rows


def test_ledger_verify_detects_tampering(tmp_path, capsys):
    from envforge.ledger import RunLedger

    path = tmp_path / "ledger.jsonl"
    ledger = RunLedger(path)
    ledger.append("a", step=1, payload={"x": 1})
    ledger.append("b", step=1, payload={"x": 2})
    ledger.close()
    text = path.read_text().replace('"x": 2', '"x": 3')
    path.write_text(text)
    assert dispatch(["ledger", "verify", str(path)]) == 1


def test_missing_run_dir_is_usage_error(tmp_path, capsys, monkeypatch):
    monkeypatch.delenv("ENVFORGE_RUN_DIR", raising=False)
    assert dispatch(["run"]) == 64


def test_operational_error_exits_one(capsys):
    assert dispatch(["validate", "/nonexistent/artifact.json"]) == 1
