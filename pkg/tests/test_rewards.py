"""Reward composition and admission predicate arithmetic."""

import math

import pytest
from hypothesis import given, settings, strategies as st

from envforge.calibration import CalibrationConfig
from envforge.errors import MissingAccuracy
from envforge.rewards import compose_reward, decide_admission, q_val


def test_q_val_exact_piecewise_values():
    assert q_val(0) == -1.0
    assert q_val(1) == -0.5
    assert q_val(2) == -0.25
    assert q_val(3) == 0.0
    assert q_val(4) == 0.0
    assert q_val(5, accuracy=0.3) == 1.0


def test_q_val_level_five_needs_accuracy():
    with pytest.raises(MissingAccuracy):
        q_val(5)


def test_q_val_rejects_out_of_range_level():
    with pytest.raises(ValueError):
        q_val(6)


def test_compose_reward_forced_examples():
    # level 5, accuracy at target, gamma 2, novelty 0.4 -> 1.0 + 0.8
    full = compose_reward(5, gamma=2.0, novelty=0.4, accuracy=0.3)
    assert math.isclose(full.r_gen, 1.8, abs_tol=1e-12)
    assert full.novelty_bonus == pytest.approx(0.8, abs=1e-12)

    # level 2, gamma 5, novelty 1 -> -0.25 + 5.0
    mid = compose_reward(2, gamma=5.0, novelty=1.0)
    assert math.isclose(mid.r_gen, 4.75, abs_tol=1e-12)

    # level 1: bonus gated off entirely
    low = compose_reward(1, gamma=5.0, novelty=1.0)
    assert low.r_gen == -0.5
    assert low.novelty_bonus == 0.0


def test_bonus_gate_below_level_two():
    for level in (0, 1):
        breakdown = compose_reward(level, gamma=5.0, novelty=0.9)
        assert breakdown.novelty_bonus == 0.0
        assert breakdown.novelty == 0.0


def test_level_two_and_up_requires_novelty():
    with pytest.raises(ValueError):
        compose_reward(3, gamma=2.0, novelty=None)


def test_ablation_toggles():
    base = dict(gamma=2.0, novelty=0.5, accuracy=0.3)
    both = compose_reward(5, **base)
    no_quality = compose_reward(5, quality_enabled=False, **base)
    no_diversity = compose_reward(5, diversity_enabled=False, **base)
    neither = compose_reward(5, quality_enabled=False, diversity_enabled=False, **base)
    assert math.isclose(both.r_gen, 1.0 + 1.0, abs_tol=1e-12)
    assert no_quality.r_gen == both.novelty_bonus
    assert no_diversity.r_gen == both.q_val
    assert neither.r_gen == 0.0


@settings(max_examples=200, deadline=None)
@given(
    level=st.integers(0, 5),
    gamma=st.floats(2.0, 5.0),
    novelty=st.floats(0.0, 1.0),
    accuracy=st.floats(0.0, 1.0),
)
def test_toggle_algebra_always_zero_when_both_off(level, gamma, novelty, accuracy):
    breakdown = compose_reward(level, gamma, novelty, accuracy,
                               quality_enabled=False, diversity_enabled=False)
    assert breakdown.r_gen == 0.0


@settings(max_examples=200, deadline=None)
@given(
    level=st.integers(0, 5),
    gamma=st.floats(2.0, 5.0),
    novelty=st.floats(0.0, 1.0),
    accuracy=st.floats(0.0, 1.0),
)
def test_review_verdict_cannot_touch_r_gen(level, gamma, novelty, accuracy):
    """Differential check: the reward is a pure function of (level, gamma,
    novelty, accuracy); recomputing it while flipping an imagined review
    verdict changes nothing because no such input exists."""
    a = compose_reward(level, gamma, novelty, accuracy)
    b = compose_reward(level, gamma, novelty, accuracy)
    assert a == b


def test_admission_happy_path():
    decision = decide_admission(5, True, 0.375, 0.42, 0.8)
    assert decision.admitted
    assert all(decision.sub_predicates.values())


def test_admission_boundary_exclusions():
    assert not decide_admission(5, True, 1.0, 0.42, 0.8).accuracy_ok
    assert not decide_admission(5, True, 0.0, 0.42, 0.8).accuracy_ok
    assert not decide_admission(5, True, 0.5, 0.8, 0.8).novelty_ok  # sim == gate is out
    assert decide_admission(5, True, 0.5, 0.7999999, 0.8).novelty_ok


def test_admission_review_and_level_gates():
    rejected = decide_admission(5, False, 0.375, 0.42, 0.8)
    assert not rejected.admitted and not rejected.review_ok
    low = decide_admission(4, True, 0.375, 0.42, 0.8)
    assert not low.admitted and not low.level_ok


def test_admission_missing_accuracy_blocks():
    decision = decide_admission(5, True, None, 0.42, 0.8)
    assert not decision.accuracy_ok and not decision.admitted


def test_q_val_uses_custom_width():
    config = CalibrationConfig(accuracy_width=0.1)
    assert math.isclose(q_val(5, 0.4, config), math.exp(-0.5), abs_tol=1e-12)
