"""Solver-relative difficulty calibration.

Draws fresh instances from a level-5 candidate, collects a single solver
response per instance, and averages pass indicators into the empirical
accuracy; the difficulty reward is a Gaussian bump peaking at the target
accuracy.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field

from .artifacts import DEFAULT_LIMITS, EnvArtifact, InstanceRecord, RunnerLimits
from .errors import CalibrationAborted, OracleUnavailable, RenderUnavailable, RunnerError
from . import runner
from .validator import _increment_ints, generic_answer_rendering


@dataclass
class CalibrationConfig:
    m: int = 8
    difficulty: int = 2
    target_accuracy: float = 0.3
    accuracy_width: float = 0.2

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if not 0.0 < self.target_accuracy < 1.0:
            raise ValueError("target accuracy must lie strictly inside (0, 1)")
        if self.accuracy_width <= 0:
            raise ValueError("accuracy width must be > 0")


@dataclass(frozen=True)
class CalibrationInstance:
    seed: int
    score: float
    solver_response_digest: str


@dataclass
class CalibrationReport:
    empirical_accuracy: float
    m_effective: int
    per_instance: list[CalibrationInstance]


class ResponseOracle:
    """Harness-only access to the correct answer for the current instance.

    Scripted solvers use it to emit correct or deliberately perturbed
    responses; external solvers never see it."""

    def __init__(self, handle: runner.EnvHandle, record: InstanceRecord):
        self._handle = handle
        self._record = record

    def correct_response(self) -> str:
        try:
            return runner.render_answer(self._handle, self._record.reference)
        except RenderUnavailable:
            text = generic_answer_rendering(self._record.reference)
            if text is None:
                raise OracleUnavailable("no correct-response rendering available")
            return text

    def perturbed_response(self) -> str:
        correct = self.correct_response()
        wrong = _increment_ints(correct)
        return wrong if wrong != correct else correct + " x"


def default_instance_seeds(env_id: str, m: int, salt: str = "calibration") -> list[int]:
    """Deterministic fresh-seed stream per candidate."""
    seeds = []
    for i in range(m):
        digest = hashlib.blake2b(f"{salt}|{env_id}|{i}".encode(), digest_size=8).digest()
        seeds.append(int.from_bytes(digest, "big") % (2**31))
    return seeds


def calibrate(
    artifact: EnvArtifact,
    solver,
    config: CalibrationConfig | None = None,
    limits: RunnerLimits = DEFAULT_LIMITS,
    instance_seeds: list[int] | None = None,
) -> CalibrationReport:
    """Empirical accuracy over m fresh instances, one solver response each.

    No solver response influences any other instance; generation failures
    shrink the denominator rather than counting as solver failures."""
    config = config or CalibrationConfig()
    seeds = instance_seeds if instance_seeds is not None else default_instance_seeds(artifact.env_id, config.m)
    if len(seeds) != config.m:
        raise ValueError(f"expected {config.m} instance seeds, got {len(seeds)}")

    instances: list[CalibrationInstance] = []
    successes = 0
    m_effective = 0
    with runner.launch(artifact, limits) as handle:
        for seed in seeds:
            try:
                record = runner.generate(handle, seed, config.difficulty)
            except RunnerError:
                continue
            m_effective += 1
            response = solver.respond(record.prompt, ResponseOracle(handle, record))
            result = runner.score(handle, record, response)
            if result.score > 0:
                successes += 1
            digest = hashlib.sha256(response.encode()).hexdigest()[:16]
            instances.append(CalibrationInstance(seed=seed, score=result.score,
                                                 solver_response_digest=digest))
    if m_effective == 0:
        raise CalibrationAborted(f"all {config.m} generates failed for {artifact.env_id}")
    return CalibrationReport(
        empirical_accuracy=successes / m_effective,
        m_effective=m_effective,
        per_instance=instances,
    )


def q_unc(accuracy: float, config: CalibrationConfig | None = None) -> float:
    """Gaussian-shaped difficulty reward, maximal at the target accuracy."""
    config = config or CalibrationConfig()
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError(f"accuracy {accuracy} outside [0, 1]")
    delta = accuracy - config.target_accuracy
    return math.exp(-(delta * delta) / (2.0 * config.accuracy_width ** 2))
