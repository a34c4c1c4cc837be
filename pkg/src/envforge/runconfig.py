"""Run configuration: every knob in one structured file, with precedence
flags > environment variables > config file > defaults."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .artifacts import RunnerLimits
from .calibration import CalibrationConfig
from .novelty import NoveltyState
from .validator import ValidationConfig

ENV_RUN_DIR = "ENVFORGE_RUN_DIR"
ENV_EMBED_ENDPOINT = "ENVFORGE_EMBED_ENDPOINT"
ENV_POLICY_ENDPOINT = "ENVFORGE_POLICY_ENDPOINT"


@dataclass
class LoopConfig:
    generator_prompts_per_step: int = 16
    generator_group_size: int = 8
    solver_batch: int = 64
    solver_group_size: int = 8
    w_gen: float = 0.3
    beta_kl: float = 1e-3
    steps: int = 100
    fewshot_k: int = 3
    solver_difficulty: int = 2
    review_k: int = 3
    review_rule: str = "any_reject"
    quality_enabled: bool = True
    diversity_enabled: bool = True

    def __post_init__(self) -> None:
        for name in ("generator_prompts_per_step", "generator_group_size",
                     "solver_batch", "solver_group_size", "steps", "fewshot_k"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass
class NoveltyKnobs:
    ema_decay: float = 0.6
    ema_init: float = 0.5
    mixture: float = 0.5
    gamma_min: float = 2.0
    gamma_max: float = 5.0
    tau_low: float = 0.45
    tau_high: float = 0.65
    tau_gate: float = 0.8
    embedding_dimension: int = 256

    def build_state(self) -> NoveltyState:
        return NoveltyState(
            ema_similarity=self.ema_init,
            ema_decay=self.ema_decay,
            mixture=self.mixture,
            gamma_min=self.gamma_min,
            gamma_max=self.gamma_max,
            tau_low=self.tau_low,
            tau_high=self.tau_high,
            tau_gate=self.tau_gate,
        )


@dataclass
class PoolKnobs:
    rotation_cadence: int = 10
    max_epochs: int = 5
    seed_floor: float = 0.2
    draws_per_epoch: int = 4


@dataclass
class RunConfig:
    run_seed: int = 0
    bug_rate: float = 0.3
    solver_p: float = 0.3
    seed_count: int = 10
    clients: str = "scripted"  # scripted | endpoint
    candidate_entry_command: str = "python3 -m envkit.serve {source_file}"
    policy_endpoint: str = ""
    embed_endpoint: str = ""
    loop: LoopConfig = field(default_factory=LoopConfig)
    validation: ValidationConfig = field(default_factory=ValidationConfig)
    calibration: CalibrationConfig = field(default_factory=CalibrationConfig)
    limits: RunnerLimits = field(default_factory=RunnerLimits)
    novelty: NoveltyKnobs = field(default_factory=NoveltyKnobs)
    pool: PoolKnobs = field(default_factory=PoolKnobs)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        data = dict(data)
        sections = {
            "loop": LoopConfig,
            "validation": ValidationConfig,
            "calibration": CalibrationConfig,
            "limits": RunnerLimits,
            "novelty": NoveltyKnobs,
            "pool": PoolKnobs,
        }
        kwargs = {}
        for key, value in data.items():
            if key in sections:
                if key == "limits":
                    kwargs[key] = RunnerLimits.from_dict(value)
                else:
                    kwargs[key] = sections[key](**value)
            else:
                kwargs[key] = value
        return cls(**kwargs)


def load_config_file(path: str | Path) -> dict:
    path = Path(path)
    text = path.read_text()
    if path.suffix in (".yaml", ".yml"):
        import yaml

        return yaml.safe_load(text) or {}
    return json.loads(text)


def _deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def resolve_config(
    file_path: str | Path | None = None,
    flag_overrides: dict | None = None,
    env: dict | None = None,
) -> RunConfig:
    """Merge defaults <- config file <- environment <- flags."""
    env = os.environ if env is None else env
    data = RunConfig().to_dict()
    if file_path is not None:
        data = _deep_merge(data, load_config_file(file_path))
    if env.get(ENV_POLICY_ENDPOINT):
        data["policy_endpoint"] = env[ENV_POLICY_ENDPOINT]
    if env.get(ENV_EMBED_ENDPOINT):
        data["embed_endpoint"] = env[ENV_EMBED_ENDPOINT]
    if flag_overrides:
        data = _deep_merge(data, flag_overrides)
    return RunConfig.from_dict(data)


def trainer_metadata(config: RunConfig) -> dict:
    """Optimizer-side settings exported for the external trainer; this
    framework never computes the loss or any parameter update."""
    return {
        "algorithm": "grpo",
        "w_gen": config.loop.w_gen,
        "beta_kl": config.loop.beta_kl,
        "ppo_clip_low": 0.2,
        "ppo_clip_high": 0.28,
        "dual_clip": 10.0,
        "entropy_coeff": 0.0,
        "optimizer": "AdamW",
        "learning_rate": 5e-7,
        "warmup_steps": 5,
        "weight_decay": 0.1,
        "grad_clip": 1.0,
        "generator_temperature": 1.0,
        "solver_temperature": 1.0,
        "review_temperature": 0.6,
        "generator_max_response_tokens": 8192,
        "solver_max_prompt_tokens": 8192,
        "solver_max_response_tokens": 16384,
    }
