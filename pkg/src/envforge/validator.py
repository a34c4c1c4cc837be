"""The five-layer validation ladder and scorer-contract probes.

Layers run in order and stop at the first failure; the report's level is the
highest layer fully passed. Runner failures never escape: they become the
failing layer's evidence.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field, asdict
from typing import Callable

from .artifacts import DEFAULT_LIMITS, EnvArtifact, InstanceRecord, RunnerLimits
from .errors import RenderUnavailable, RunnerError
from . import runner

REQUIRED_ENTRY_POINTS = {"generate", "render", "process", "score"}

# Substring leak checks ignore very short serializations: a reference like "7"
# would otherwise flag any prompt containing that digit.
MIN_LEAK_PIECE_LEN = 4


@dataclass
class ValidationConfig:
    seeds_per_layer: int = 5
    difficulties_probed: tuple[int, ...] = (1, 2, 3)
    determinism_repeats: int = 3
    perturbations_per_instance: int = 4
    seed_base: int = 0

    def __post_init__(self) -> None:
        self.difficulties_probed = tuple(self.difficulties_probed)
        if self.seeds_per_layer < 1 or self.determinism_repeats < 1 \
                or self.perturbations_per_instance < 1 or len(self.difficulties_probed) < 1:
            raise ValueError("all validation counts must be >= 1")

    @property
    def probe_seeds(self) -> tuple[int, ...]:
        return tuple(range(self.seed_base, self.seed_base + self.seeds_per_layer))


@dataclass(frozen=True)
class ScorerProbeOutcome:
    probe_kind: str  # reference_positive | perturbed | malformed | type_mismatch | leak_check
    expected_accept: bool
    observed_score: float
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class LayerEvidence:
    layer: int
    passed: bool
    cause: str = ""


@dataclass
class ValidationReport:
    env_id: str
    level: int
    layer_evidence: list[LayerEvidence]
    probe_results: list[ScorerProbeOutcome]
    sampled_records: list[InstanceRecord]

    def to_dict(self) -> dict:
        return {
            "env_id": self.env_id,
            "level": self.level,
            "layer_evidence": [asdict(e) for e in self.layer_evidence],
            "probe_results": [asdict(p) for p in self.probe_results],
            "sampled_records": [asdict(r) for r in self.sampled_records],
        }


_INT_TOKEN_RE = re.compile(r"-?\d+")


def generic_answer_rendering(reference: str) -> str | None:
    """Fallback rendering of an opaque reference as response text."""
    try:
        obj = json.loads(reference)
    except (ValueError, TypeError):
        return reference if reference.strip() else None
    if isinstance(obj, list) and all(isinstance(x, (int, str)) for x in obj):
        return " ".join(str(x) for x in obj) if obj else None
    if isinstance(obj, (int, str)):
        text = str(obj)
        return text if text.strip() else None
    return None


def _increment_ints(text: str) -> str:
    return _INT_TOKEN_RE.sub(lambda m: str(int(m.group(0)) + 1), text)


def build_perturbations(
    record: InstanceRecord,
    renderer: Callable[[str], str | None] | None = None,
    perturbations: int = 4,
) -> list[tuple[str, bool, str]]:
    """Probe responses for one record: (response_text, expected_accept, kind).

    The first entry renders the reference as a correct response (via the
    environment's render_answer when a renderer is supplied, else a generic
    serializer). Reject probes never rely on answer-order sensitivity, since
    feasibility scorers legitimately accept reordered correct answers.
    """
    if not record.reference.strip():
        raise RenderUnavailable("record has an empty reference")
    correct: str | None = None
    if renderer is not None:
        try:
            correct = renderer(record.reference)
        except RenderUnavailable:
            correct = None
    if correct is None or not correct.strip():
        correct = generic_answer_rendering(record.reference)
    if correct is None or not correct.strip():
        raise RenderUnavailable("reference unrenderable")

    probes: list[tuple[str, bool, str]] = [(correct, True, "reference_positive")]
    tokens = correct.split()

    rejects: list[tuple[str, str]] = []
    if _INT_TOKEN_RE.search(correct):
        rejects.append((_increment_ints(correct), "perturbed"))
    elif len(tokens) >= 2 and tokens[0] != tokens[-1]:
        swapped = [tokens[-1]] + tokens[1:-1] + [tokens[0]]
        rejects.append((" ".join(swapped), "perturbed"))
    else:
        rejects.append((correct + " x", "perturbed"))
    rejects.append(("", "malformed"))
    rejects.append(("abc", "malformed"))
    if len(tokens) >= 2:
        rejects.append((" ".join(tokens[:-1]), "type_mismatch"))
    else:
        rejects.append((f"{tokens[0]} {tokens[0]}", "type_mismatch"))
    rejects.append((" ".join(tokens + tokens), "perturbed"))
    extra = 0
    while len(rejects) < perturbations:
        extra += 1
        rejects.append((f"abc{extra}", "malformed"))

    for text, kind in rejects[:perturbations]:
        probes.append((text, False, kind))
    return probes


def _leak_pieces(reference: str) -> list[str]:
    pieces = [reference]
    try:
        obj = json.loads(reference)
    except (ValueError, TypeError):
        obj = None
    elements: list = []
    if isinstance(obj, list):
        elements = obj
    elif isinstance(obj, dict):
        elements = list(obj.values())
    for element in elements:
        pieces.append(json.dumps(element, sort_keys=True, separators=(",", ":")))
    return [p for p in pieces if len(p) >= MIN_LEAK_PIECE_LEN]


def validate(
    artifact: EnvArtifact,
    config: ValidationConfig | None = None,
    limits: RunnerLimits = DEFAULT_LIMITS,
) -> ValidationReport:
    """Run L1..L5 and report the highest layer reached."""
    config = config or ValidationConfig()
    evidence: list[LayerEvidence] = []
    probes: list[ScorerProbeOutcome] = []
    records: dict[tuple[int, int], InstanceRecord] = {}
    handle = None
    level = 0

    def fail(layer: int, cause: str) -> ValidationReport:
        evidence.append(LayerEvidence(layer=layer, passed=False, cause=cause))
        if handle is not None:
            handle.close()
        return ValidationReport(
            env_id=artifact.env_id,
            level=layer - 1,
            layer_evidence=evidence,
            probe_results=probes,
            sampled_records=sorted(records.values(), key=lambda r: (r.difficulty, r.seed)),
        )

    # ---- L1: static conformance ---------------------------------------------
    if artifact.is_mock:
        evidence.append(LayerEvidence(layer=1, passed=True, cause="mock artifact (vacuous)"))
    else:
        violations = runner.scan_imports(artifact, limits)
        if violations:
            return fail(1, "; ".join(str(v) for v in violations))
        try:
            handle = runner.launch(artifact, limits)
            info = runner.conformance(handle)
        except RunnerError as exc:
            return fail(1, f"conformance probe failed: {exc}")
        declared = set(info.get("entry_points") or [])
        missing = REQUIRED_ENTRY_POINTS - declared
        if missing:
            return fail(1, f"missing entry points: {sorted(missing)}")
        evidence.append(LayerEvidence(layer=1, passed=True))

    # ---- L2: one full generate/render/score round per probed pair -----------
    if handle is None:
        try:
            handle = runner.launch(artifact, limits)
        except RunnerError as exc:
            return fail(2, f"launch failed: {exc}")
    for difficulty in config.difficulties_probed:
        for seed in config.probe_seeds:
            try:
                record = runner.generate(handle, seed, difficulty)
                runner.score(handle, record, "")
            except RunnerError as exc:
                return fail(2, f"(seed={seed}, difficulty={difficulty}): {exc}")
            records[(seed, difficulty)] = record
    evidence.append(LayerEvidence(layer=2, passed=True))

    # ---- L3: byte-wise determinism under repeated generation ----------------
    for (seed, difficulty), first in records.items():
        for _ in range(config.determinism_repeats):
            try:
                again = runner.generate(handle, seed, difficulty)
            except RunnerError as exc:
                return fail(3, f"regeneration failed (seed={seed}, difficulty={difficulty}): {exc}")
            if (again.latent, again.prompt, again.reference) != (first.latent, first.prompt, first.reference):
                return fail(3, f"nondeterministic at (seed={seed}, difficulty={difficulty})")
    evidence.append(LayerEvidence(layer=3, passed=True))

    # ---- L4: non-triviality across seeds and difficulties -------------------
    if config.seeds_per_layer >= 2:
        prompt_varies = any(
            len({records[(s, d)].prompt for s in config.probe_seeds}) >= 2
            for d in config.difficulties_probed
        )
        reference_varies = any(
            len({records[(s, d)].reference for s in config.probe_seeds}) >= 2
            for d in config.difficulties_probed
        )
        if not (prompt_varies and reference_varies):
            return fail(4, "no variation across seeds")
    if len(config.difficulties_probed) >= 2:
        difficulty_varies = any(
            len({records[(s, d)].prompt for d in config.difficulties_probed}) >= 2
            or len({len(records[(s, d)].latent) for d in config.difficulties_probed}) >= 2
            for s in config.probe_seeds
        )
        if not difficulty_varies:
            return fail(4, "no variation across difficulties")
    evidence.append(LayerEvidence(layer=4, passed=True))

    # ---- L5: scorer contract on every sampled record -------------------------
    def renderer(reference: str) -> str | None:
        return runner.render_answer(handle, reference)

    for (seed, difficulty), record in records.items():
        try:
            probe_set = build_perturbations(record, renderer, config.perturbations_per_instance)
        except RenderUnavailable:
            return fail(5, f"reference unrenderable (seed={seed}, difficulty={difficulty})")
        reject_parsed: list[object] = []
        for text, expected_accept, kind in probe_set:
            try:
                result = runner.score(handle, record, text)
            except RunnerError as exc:
                # Scorer robustness is part of the contract: a probe crash is
                # an L5 failure, not a framework error.
                probes.append(ScorerProbeOutcome(kind, expected_accept, 0.0, False,
                                                 detail=f"scorer crashed: {exc}"))
                return fail(5, f"scorer crashed on {kind} probe (seed={seed}, difficulty={difficulty})")
            passed = (result.score > 0) == expected_accept
            probes.append(ScorerProbeOutcome(kind, expected_accept, result.score, passed,
                                             detail=text[:60]))
            if not expected_accept and result.parsed is not None:
                reject_parsed.append(result.parsed)
            if not passed:
                return fail(5, f"{kind} probe misjudged (seed={seed}, difficulty={difficulty})")
        leaked = ""
        pieces = _leak_pieces(record.reference)
        for piece in pieces:
            if piece in record.prompt:
                leaked = f"prompt contains reference serialization {piece!r}"
                break
        if not leaked:
            for parsed in reject_parsed:
                blob = json.dumps(parsed, sort_keys=True, separators=(",", ":"))
                for piece in pieces:
                    if piece in blob and piece not in json.dumps(None):
                        leaked = "parser output of a reject probe echoes the reference"
                        break
                if leaked:
                    break
        probes.append(ScorerProbeOutcome("leak_check", False, 0.0, not leaked, detail=leaked))
        if leaked:
            return fail(5, f"leak check failed (seed={seed}, difficulty={difficulty}): {leaked}")
    evidence.append(LayerEvidence(layer=5, passed=True))

    handle.close()
    return ValidationReport(
        env_id=artifact.env_id,
        level=5,
        layer_evidence=evidence,
        probe_results=probes,
        sampled_records=sorted(records.values(), key=lambda r: (r.difficulty, r.seed)),
    )
