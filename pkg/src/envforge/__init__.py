"""envforge: self-evolving pools of verifiable reasoning environments.

Validates candidate environment programs through a five-layer ladder,
calibrates difficulty against a pluggable solver, scores two-view novelty,
composes the generator reward, gates pool admission through semantic review,
rotates the pool behind a protected seed floor, and exports group-relative
reward batches for an external policy trainer.
"""

from .artifacts import DEFAULT_LIMITS, EnvArtifact, InstanceRecord, RunnerLimits, ScoreResult
from .calibration import CalibrationConfig, CalibrationReport, calibrate, q_unc
from .mocks import MOCK_BEHAVIORS, MockSpec, mock_env
from .novelty import NoveltyScore, NoveltyState, admit_embeddings, similarity, update_gamma
from .rewards import AdmissionDecision, RewardBreakdown, compose_reward, decide_admission, q_val
from .review import AgreementAudit, ReviewPacket, ReviewVerdict, audit, review
from .validator import ValidationConfig, ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_LIMITS",
    "EnvArtifact",
    "InstanceRecord",
    "RunnerLimits",
    "ScoreResult",
    "CalibrationConfig",
    "CalibrationReport",
    "calibrate",
    "q_unc",
    "MOCK_BEHAVIORS",
    "MockSpec",
    "mock_env",
    "NoveltyScore",
    "NoveltyState",
    "admit_embeddings",
    "similarity",
    "update_gamma",
    "AdmissionDecision",
    "RewardBreakdown",
    "compose_reward",
    "decide_admission",
    "q_val",
    "AgreementAudit",
    "ReviewPacket",
    "ReviewVerdict",
    "audit",
    "review",
    "ValidationConfig",
    "ValidationReport",
    "validate",
    "__version__",
]
