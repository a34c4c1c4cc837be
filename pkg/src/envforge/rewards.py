"""Generator reward composition and the four-way admission predicate."""

from __future__ import annotations

from dataclasses import dataclass

from .calibration import CalibrationConfig, q_unc
from .errors import MissingAccuracy


@dataclass(frozen=True)
class RewardBreakdown:
    level: int
    q_val: float
    q_unc: float | None
    gamma: float
    novelty: float
    novelty_bonus: float
    r_gen: float
    quality_enabled: bool
    diversity_enabled: bool


@dataclass(frozen=True)
class AdmissionDecision:
    admitted: bool
    level_ok: bool
    review_ok: bool
    accuracy_ok: bool
    novelty_ok: bool
    accuracy: float | None
    sim: float

    @property
    def sub_predicates(self) -> dict[str, bool]:
        return {
            "level_ok": self.level_ok,
            "review_ok": self.review_ok,
            "accuracy_ok": self.accuracy_ok,
            "novelty_ok": self.novelty_ok,
        }


def q_val(level: int, accuracy: float | None = None,
          config: CalibrationConfig | None = None) -> float:
    """Piecewise validation reward: penalties below execution level, zero in
    the middle, the difficulty reward only at level 5."""
    if not 0 <= level <= 5:
        raise ValueError(f"level must be in 0..5, got {level}")
    if level < 1:
        return -1.0
    if level == 1:
        return -0.5
    if level == 2:
        return -0.25
    if level < 5:
        return 0.0
    if accuracy is None:
        raise MissingAccuracy("level-5 reward needs an empirical accuracy")
    return q_unc(accuracy, config)


def compose_reward(
    level: int,
    gamma: float,
    novelty: float | None,
    accuracy: float | None = None,
    config: CalibrationConfig | None = None,
    quality_enabled: bool = True,
    diversity_enabled: bool = True,
) -> RewardBreakdown:
    """Full generator reward. The review verdict is deliberately not a
    parameter: it can only gate admission, never shape this value."""
    if level >= 2 and novelty is None:
        raise ValueError("novelty score required for level >= 2 candidates")
    quality = q_val(level, accuracy, config)
    unc = q_unc(accuracy, config) if level == 5 and accuracy is not None else None
    novelty_value = float(novelty) if novelty is not None else 0.0
    bonus = gamma * novelty_value if level >= 2 else 0.0
    r_gen = (quality if quality_enabled else 0.0) + (bonus if diversity_enabled else 0.0)
    return RewardBreakdown(
        level=level,
        q_val=quality,
        q_unc=unc,
        gamma=gamma,
        novelty=novelty_value if level >= 2 else 0.0,
        novelty_bonus=bonus,
        r_gen=r_gen,
        quality_enabled=quality_enabled,
        diversity_enabled=diversity_enabled,
    )


def decide_admission(
    level: int,
    review_accept: bool,
    accuracy: float | None,
    sim: float,
    tau_gate: float = 0.8,
) -> AdmissionDecision:
    """Strict conjunction: level 5, review acceptance, accuracy strictly
    inside (0, 1), similarity strictly below the gate."""
    level_ok = level == 5
    review_ok = bool(review_accept)
    accuracy_ok = accuracy is not None and 0.0 < accuracy < 1.0
    novelty_ok = sim < tau_gate
    return AdmissionDecision(
        admitted=level_ok and review_ok and accuracy_ok and novelty_ok,
        level_ok=level_ok,
        review_ok=review_ok,
        accuracy_ok=accuracy_ok,
        novelty_ok=novelty_ok,
        accuracy=accuracy,
        sim=sim,
    )
