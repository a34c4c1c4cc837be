"""Semantic review gate: k independent reviews, rule-based aggregation, and
the agreement-audit arithmetic.

The verdict gates pool admission only; it is never an input to the generator
reward (the reward module's signature enforces that, and a differential test
asserts it).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from .errors import ReviewerUnavailable
from .validator import ScorerProbeOutcome
from .artifacts import InstanceRecord

AGGREGATION_RULES = ("single", "majority", "any_reject", "all_reject")

REVIEW_INSTRUCTION = """\
Review the candidate environment code for semantic bugs. Work through four
checks and report a verdict:
1. Data flow: confirm every parameter that shapes the instance is surfaced in
   the rendered prompt, and that no hidden state leaks into it.
2. Instance trace: walk one provided instance end to end; the reference must
   be the correct answer to the rendered question.
3. Algorithm check: the generator must compute the quantity the prompt
   advertises (watch for relabeled objectives and wrong recurrences).
4. Scorer check: the scorer must accept exactly the advertised answers; flag
   overly permissive parsing or scoring.
Answer with a JSON object: {"has_bugs": true|false, "rationale": "..."}.
"""


@dataclass(frozen=True)
class ReviewPacket:
    source: str
    instances: list[InstanceRecord]
    probe_summary: list[ScorerProbeOutcome]
    prompt_rendered: str

    def __post_init__(self) -> None:
        if not self.instances:
            raise ValueError("review packet needs at least one instance")


@dataclass(frozen=True)
class ReviewVerdict:
    verdicts: list[bool]  # True = this review flags a likely semantic bug
    aggregated: bool      # True = accept
    rule: str


def aggregate(verdicts: list[bool], rule: str) -> bool:
    """Accept/reject from per-review bug flags."""
    if rule not in AGGREGATION_RULES:
        raise ValueError(f"unknown aggregation rule {rule!r}")
    flags = sum(verdicts)
    if rule == "single":
        return not verdicts[0]
    if rule == "majority":
        return not flags * 2 > len(verdicts)
    if rule == "any_reject":
        return flags == 0
    return flags < len(verdicts)  # all_reject


_VERDICT_RE = re.compile(r'"has_bugs"\s*:\s*(true|false)', re.IGNORECASE)


def parse_verdict(raw: str) -> bool:
    """Extract the bug flag from reviewer output; unparseable output counts
    as a flag (conservative)."""
    try:
        data = json.loads(raw)
        if isinstance(data, dict) and isinstance(data.get("has_bugs"), bool):
            return data["has_bugs"]
    except (ValueError, TypeError):
        pass
    match = _VERDICT_RE.search(raw)
    if match:
        return match.group(1).lower() == "true"
    return True


def review(packet: ReviewPacket, reviewer, k: int = 3, rule: str = "any_reject") -> ReviewVerdict:
    """Run k independent reviews (fresh call context each) and aggregate."""
    if k < 1:
        raise ValueError("k must be >= 1")
    verdicts = []
    for i in range(k):
        raw = reviewer.review(packet, REVIEW_INSTRUCTION, call_index=i)
        verdicts.append(parse_verdict(raw))
    return ReviewVerdict(verdicts=verdicts, aggregated=aggregate(verdicts, rule), rule=rule)


@dataclass(frozen=True)
class AgreementAudit:
    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    zero_division_flags: tuple[str, ...] = ()


def audit(labels: list[tuple[bool, bool]]) -> AgreementAudit:
    """Confusion counts and metrics for (reviewer_flagged, truth_has_bugs)
    pairs; the positive class is has_bugs. Division by zero yields 0 with a
    flag naming the metric."""
    if not labels:
        raise ValueError("labels must be non-empty")
    tp = sum(1 for flagged, truth in labels if flagged and truth)
    fp = sum(1 for flagged, truth in labels if flagged and not truth)
    fn = sum(1 for flagged, truth in labels if not flagged and truth)
    tn = len(labels) - tp - fp - fn

    flags: list[str] = []

    def ratio(num: int, den: int, name: str) -> float:
        if den == 0:
            flags.append(name)
            return 0.0
        return num / den

    accuracy = ratio(tp + tn, tp + fp + tn + fn, "accuracy")
    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    if precision + recall == 0:
        flags.append("f1")
        f1 = 0.0
    else:
        f1 = 2 * precision * recall / (precision + recall)
    return AgreementAudit(tp=tp, fp=fp, tn=tn, fn=fn, accuracy=accuracy,
                          precision=precision, recall=recall, f1=f1,
                          zero_division_flags=tuple(flags))


def audit_from_confusion(tp: int, fp: int, tn: int, fn: int) -> AgreementAudit:
    labels = [(True, True)] * tp + [(True, False)] * fp \
        + [(False, False)] * tn + [(False, True)] * fn
    return audit(labels)
