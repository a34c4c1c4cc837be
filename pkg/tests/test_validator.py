"""Validation ladder: fixture matrix, probe construction, budgets, leaks."""

import random

import pytest

from envforge.artifacts import InstanceRecord
from envforge.errors import RenderUnavailable
from envforge.mocks import MockSpec, mock_env
from envforge.protocol import canonical_json
from envforge import runner
from envforge.validator import (
    ValidationConfig,
    build_perturbations,
    generic_answer_rendering,
    validate,
)

from conftest import subprocess_artifact


def sorter_record(values, seed=0, difficulty=1):
    return InstanceRecord(
        seed=seed,
        difficulty=difficulty,
        latent=canonical_json(values),
        reference=canonical_json(sorted(values)),
        prompt="Sort these numbers: " + " ".join(map(str, values)),
    )


# ---------------------------------------------------------------------------
# Perturbation fixtures, verified against the scorer before freezing.
# ---------------------------------------------------------------------------

def test_sorting_perturbation_fixture_agrees_with_scorer():
    """Every probe's expected verdict must match what the faithful sorter
    actually does — the probe list is only trustworthy if the scorer is the
    oracle for it."""
    artifact = mock_env("faithful_sorter")
    with runner.launch(artifact) as handle:
        record = runner.generate(handle, seed=7, difficulty=3)
        probes = build_perturbations(record, lambda ref: runner.render_answer(handle, ref))
        assert probes[0][1] is True
        kinds = [kind for _, _, kind in probes]
        assert kinds == ["reference_positive", "perturbed", "malformed", "malformed", "type_mismatch"]
        for text, expected_accept, kind in probes:
            result = runner.score(handle, record, text)
            assert (result.score > 0) == expected_accept, (text, kind)


def test_perturbed_probe_increments_every_integer():
    record = sorter_record([3, 1, 2])
    probes = build_perturbations(record, None)
    assert probes[0][0] == "1 2 3"
    perturbed = [text for text, _, kind in probes if kind == "perturbed"]
    assert perturbed == ["2 3 4"]


def test_single_integer_reference_probes():
    record = InstanceRecord(seed=0, difficulty=1, latent="[7]", reference="7",
                            prompt="Output seven-ish")
    probes = build_perturbations(record, None)
    assert ("7", True, "reference_positive") in probes
    assert ("8", False, "perturbed") in probes
    assert ("7 7", False, "type_mismatch") in probes


def test_reject_probe_count_follows_config():
    record = sorter_record([5, 9, 1, 4])
    assert len(build_perturbations(record, None, perturbations=4)) == 5
    assert len(build_perturbations(record, None, perturbations=6)) == 7


def test_empty_reference_is_unrenderable():
    record = InstanceRecord(seed=0, difficulty=1, latent="[]", reference="  ",
                            prompt="p")
    with pytest.raises(RenderUnavailable):
        build_perturbations(record, None)


def test_generic_rendering_fallback():
    assert generic_answer_rendering("[1, 2, 3]") == "1 2 3"
    assert generic_answer_rendering("42") == "42"
    assert generic_answer_rendering('"yes"') == "yes"
    assert generic_answer_rendering('{"value": 3}') is None


# ---------------------------------------------------------------------------
# Fixture matrix: six behaviors map onto their designated layers exactly.
# ---------------------------------------------------------------------------

EXPECTED_LEVELS = {
    "faithful_sorter": ("==", 5),
    "launch_fail": ("<=", 1),
    "nondeterministic": ("==", 2),
    "constant_output": ("==", 3),
    "permissive_scorer": ("==", 4),
    "leaky_parser": ("<=", 4),
    "crash_on_score": ("<=", 4),
}


def assert_matrix(config: ValidationConfig):
    for behavior, (op, expected) in EXPECTED_LEVELS.items():
        report = validate(mock_env(behavior), config)
        if op == "==":
            assert report.level == expected, (behavior, report.level)
        else:
            assert report.level <= expected, (behavior, report.level)


def test_fixture_matrix_default_config():
    assert_matrix(ValidationConfig())


def test_fixture_matrix_pins_leaky_and_crash_at_four():
    # Stricter than the matrix bound: both pass L1-L4 and fail exactly L5.
    for behavior in ("leaky_parser", "crash_on_score"):
        report = validate(mock_env(behavior))
        assert report.level == 4
        assert report.layer_evidence[-1].layer == 5


def test_fixture_matrix_randomized_configs():
    rng = random.Random(20240811)
    for _ in range(20):
        config = ValidationConfig(
            seeds_per_layer=rng.randint(2, 6),
            difficulties_probed=tuple(sorted(rng.sample(range(1, 6), rng.randint(2, 3)))),
            determinism_repeats=rng.randint(1, 3),
            perturbations_per_instance=rng.randint(3, 5),
            seed_base=rng.randint(0, 1000),
        )
        assert_matrix(config)


def test_validation_is_idempotent():
    artifact = mock_env("faithful_sorter")
    config = ValidationConfig()
    assert validate(artifact, config) == validate(artifact, config)


def test_monotone_ladder_no_failed_layer_below_level():
    for behavior in EXPECTED_LEVELS:
        report = validate(mock_env(behavior))
        for evidence in report.layer_evidence:
            if evidence.layer <= report.level:
                assert evidence.passed


def test_generate_call_budget():
    """At most seeds x difficulties x (1 + repeats) generates, counted on the
    wire."""
    config = ValidationConfig(seeds_per_layer=4, difficulties_probed=(1, 2),
                              determinism_repeats=2)
    captured = {}
    original_launch = runner.launch

    def capture_launch(artifact, limits=None):
        handle = original_launch(artifact, limits or runner.DEFAULT_LIMITS)
        captured["handle"] = handle
        return handle

    import envforge.validator as validator_mod

    monkey = pytest.MonkeyPatch()
    monkey.setattr(validator_mod.runner, "launch", capture_launch)
    try:
        report = validate(mock_env("faithful_sorter"), config)
    finally:
        monkey.undo()
    assert report.level == 5
    budget = config.seeds_per_layer * len(config.difficulties_probed) * (1 + config.determinism_repeats)
    assert captured["handle"].op_counts["generate"] <= budget


def test_l4_vacuous_with_single_seed_or_difficulty():
    report = validate(mock_env("constant_output"),
                      ValidationConfig(seeds_per_layer=1, difficulties_probed=(2,)))
    assert report.level >= 4  # nothing to compare against, checks are vacuous


def test_sampled_records_and_probes_populated():
    report = validate(mock_env("faithful_sorter"),
                      ValidationConfig(seeds_per_layer=2, difficulties_probed=(1, 2)))
    assert len(report.sampled_records) == 4
    kinds = {p.probe_kind for p in report.probe_results}
    assert {"reference_positive", "perturbed", "malformed", "type_mismatch", "leak_check"} <= kinds


def test_validator_over_subprocess_artifact():
    # The inline test env is harness and environment in one file, so its
    # allowlist must cover the serving imports too.
    from envforge.artifacts import DEFAULT_IMPORT_ALLOWLIST, RunnerLimits

    limits = RunnerLimits(import_allowlist=DEFAULT_IMPORT_ALLOWLIST + ("json", "sys", "time"))
    report = validate(subprocess_artifact("normal"),
                      ValidationConfig(seeds_per_layer=3, difficulties_probed=(2, 3)),
                      limits)
    assert report.level == 5


def test_import_violation_fails_l1():
    artifact = subprocess_artifact("normal")
    tainted = type(artifact)(
        env_id="tainted",
        source="import numpy\n" + artifact.source,
        entry_command=artifact.entry_command,
        prompt_template=artifact.prompt_template,
    )
    report = validate(tainted, ValidationConfig(seeds_per_layer=2, difficulties_probed=(1,)))
    assert report.level == 0
    assert "numpy" in report.layer_evidence[-1].cause
