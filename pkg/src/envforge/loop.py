"""One self-evolution iteration: generator groups, candidate evaluation,
solver groups over the live pool, role-separated advantage normalization,
batch export, and the end-of-step pool update.
"""

from __future__ import annotations

import csv
import hashlib
import math
import os
import random
from dataclasses import dataclass, field
from pathlib import Path

from .artifacts import DEFAULT_LIMITS, EnvArtifact
from .calibration import CalibrationConfig, calibrate, default_instance_seeds
from .clients import PolicyClients, scripted_clients
from .errors import (
    CalibrationAborted,
    EmptyPool,
    ExtractionFailure,
    ReviewerUnavailable,
    RunnerError,
    SinkUnavailable,
)
from .embedding import FeatureHashingEmbedding
from .ledger import RunLedger
from .mocks import MockSpec, mock_env
from .novelty import NoveltyState, admit_embeddings, embed_views, save_cache, similarity, update_gamma
from .pool import PoolEntry, PoolState, admit, fewshot_context, init_pool, rotate, sample_env, tag_artifact
from .review import ReviewPacket, review
from .rewards import AdmissionDecision, RewardBreakdown, compose_reward, decide_admission
from .runconfig import RunConfig, trainer_metadata
from . import runner
from .validator import validate

EPSILON = 1e-8


def normalize_group(rewards: list[float]) -> list[float]:
    """Group-relative advantages: (r - mean) / max(std, eps); a constant
    group maps to all zeros."""
    if not rewards:
        raise ValueError("cannot normalize an empty group")
    mean = sum(rewards) / len(rewards)
    variance = sum((r - mean) ** 2 for r in rewards) / len(rewards)
    std = math.sqrt(variance)
    return [(r - mean) / max(std, EPSILON) for r in rewards]


@dataclass
class RolloutGroup:
    role: str  # generator | solver
    group_key: str
    items: list[tuple[str, float]]  # (trajectory_ref, raw_reward)
    advantages: list[float] = field(default_factory=list)

    def normalize(self) -> None:
        self.advantages = normalize_group([reward for _, reward in self.items])


@dataclass
class StepReport:
    step: int
    candidates_evaluated: int
    accepted_count: int
    level_histogram: dict[int, int]
    mean_generator_reward: float
    mean_solver_score: float
    gamma: float
    ema_similarity: float
    pool_active: int
    pool_retired: int
    fewshot_size: int
    prototype_count: int
    admitted_total: int

    def csv_row(self) -> dict:
        row = {
            "step": self.step,
            "candidates_evaluated": self.candidates_evaluated,
            "accepted_count": self.accepted_count,
            "mean_generator_reward": f"{self.mean_generator_reward:.6f}",
            "mean_solver_score": f"{self.mean_solver_score:.6f}",
            "gamma": f"{self.gamma:.6f}",
            "ema_similarity": f"{self.ema_similarity:.6f}",
            "pool_active": self.pool_active,
            "pool_retired": self.pool_retired,
            "fewshot_size": self.fewshot_size,
            "prototype_count": self.prototype_count,
            "admitted_total": self.admitted_total,
        }
        for level in range(6):
            row[f"l{level}"] = self.level_histogram.get(level, 0)
        return row


CSV_FIELDS = [
    "step", "candidates_evaluated", "accepted_count",
    "mean_generator_reward", "mean_solver_score", "gamma", "ema_similarity",
    "pool_active", "pool_retired", "fewshot_size", "prototype_count",
    "admitted_total", "l0", "l1", "l2", "l3", "l4", "l5",
]


@dataclass
class CandidateEvaluation:
    artifact: EnvArtifact
    level: int
    views: tuple | None
    sim: float
    novelty: float
    accuracy: float | None
    review_accept: bool | None  # None = held (reviewer unavailable) or skipped
    breakdown: RewardBreakdown | None = None
    decision: AdmissionDecision | None = None
    tags: set[str] = field(default_factory=set)
    draws: int = 0
    group_index: int = 0


@dataclass
class RunState:
    config: RunConfig
    pool: PoolState
    novelty: NoveltyState
    provider: FeatureHashingEmbedding
    ledger: RunLedger
    step: int = 0
    admitted_total: int = 0


# Ten scripted seed environments for mock-backed runs: varied task families,
# templates, and value ranges so novelty caches and the tag registry start
# with genuine spread.
_SEED_SPECS = [
    ("sort_asc", "Sort these numbers in ascending order and output them separated by spaces: {values}"),
    ("sort_desc", "Sort these numbers in descending order and output them separated by spaces: {values}"),
    ("total_sum", "Add up all of these numbers and output the total sum: {values}"),
    ("max_value", "Output the largest value in this list: {values}"),
    ("min_value", "Output the smallest value in this list: {values}"),
    ("distinct_count", "Count the distinct values in this list and output the count: {values}"),
    ("range_span", "Output the spread between the largest and smallest value: {values}"),
    ("sort_asc", "A sensor recorded these readings. Arrange them from smallest to largest: {values}"),
    ("total_sum", "Consider this sequence of integers. Compute the sum of the following values and output it: {values}"),
    ("max_value", "A game board holds these numbers. Find the max of the following numbers and output it: {values}"),
]


def build_scripted_seeds(count: int = 10) -> list[EnvArtifact]:
    seeds = []
    for i in range(count):
        task, template = _SEED_SPECS[i % len(_SEED_SPECS)]
        spec = MockSpec(
            behavior="faithful_sorter",
            task=task,
            size_base=i % 4,
            value_lo=0,
            value_hi=99 + 10 * i,
            template=template,
            salt=f"seed{i:02d}",
        )
        seeds.append(mock_env(spec, env_id=f"seed-{i:02d}-{task}", origin="seed"))
    return seeds


def init_run_state(config: RunConfig, ledger: RunLedger,
                   seed_artifacts: list[EnvArtifact] | None = None) -> RunState:
    seeds = seed_artifacts if seed_artifacts is not None else build_scripted_seeds(config.seed_count)
    pool = init_pool(
        seeds,
        rotation_cadence=config.pool.rotation_cadence,
        max_epochs=config.pool.max_epochs,
        seed_floor=config.pool.seed_floor,
        draws_per_epoch=config.pool.draws_per_epoch,
    )
    novelty_state = config.novelty.build_state()
    provider = FeatureHashingEmbedding(config.novelty.embedding_dimension)
    for artifact in seeds:
        views = embed_views(artifact, provider)
        admit_embeddings(novelty_state, artifact.env_id, views)
    ledger.append("run_init", step=0, payload={
        "seeds": [a.env_id for a in seeds],
        "prototypes": len(pool.registry.prototypes),
    })
    return RunState(config=config, pool=pool, novelty=novelty_state,
                    provider=provider, ledger=ledger)


def _digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _evaluate_candidate(state: RunState, clients: PolicyClients,
                        artifact: EnvArtifact) -> CandidateEvaluation:
    config = state.config
    report = validate(artifact, config.validation, config.limits)
    try:
        views = embed_views(artifact, state.provider)
        score = similarity(views, state.novelty)
        sim, novelty_value = score.combined_sim, score.novelty
    except ExtractionFailure:
        # Unauditable for duplication: fails the novelty gate outright.
        views, sim, novelty_value = None, 1.0, 0.0

    accuracy: float | None = None
    review_accept: bool | None = None
    if report.level == 5:
        seeds = default_instance_seeds(f"{config.run_seed}|{artifact.env_id}", config.calibration.m)
        try:
            accuracy = calibrate(artifact, clients.solver, config.calibration,
                                 config.limits, instance_seeds=seeds).empirical_accuracy
        except CalibrationAborted:
            accuracy = None
        packet = ReviewPacket(
            source=artifact.source,
            instances=list(report.sampled_records[:3]),
            probe_summary=list(report.probe_results),
            prompt_rendered=report.sampled_records[0].prompt if report.sampled_records else "",
        )
        try:
            review_accept = review(packet, clients.reviewer,
                                   config.loop.review_k, config.loop.review_rule).aggregated
        except ReviewerUnavailable:
            review_accept = None
    return CandidateEvaluation(
        artifact=artifact,
        level=report.level,
        views=views,
        sim=sim,
        novelty=novelty_value,
        accuracy=accuracy,
        review_accept=review_accept,
        tags=tag_artifact(artifact),
    )


def run_step(state: RunState, clients: PolicyClients) -> tuple[StepReport, list[RolloutGroup]]:
    config = state.config
    t = state.step + 1
    state.step = t
    state.pool.step = t
    rng_fewshot = random.Random(f"{config.run_seed}|{t}|fewshot")
    rng_solver = random.Random(f"{config.run_seed}|{t}|solver")

    # (1) few-shot generator prompts, (2) M candidates per prompt
    candidates: list[CandidateEvaluation] = []
    for p in range(config.loop.generator_prompts_per_step):
        context = fewshot_context(state.pool, config.loop.fewshot_k, rng_fewshot)
        drafts = clients.generator.propose(context, config.loop.generator_group_size)
        for i, draft in enumerate(drafts):
            artifact = EnvArtifact(
                env_id=f"cand-{t:04d}-p{p:02d}-c{i:02d}",
                source=draft.source,
                entry_command=draft.entry_command,
                prompt_template=draft.prompt_template,
                origin="generated",
                created_step=t,
            )
            evaluation = _evaluate_candidate(state, clients, artifact)
            evaluation.group_index = p
            candidates.append(evaluation)

    # (4) one EMA/gamma update per generator batch, from level>=2 candidates
    batch_sims = [c.sim for c in candidates if c.level >= 2]
    batch_max_sim = max(batch_sims, default=0.0)
    gamma_t = update_gamma(state.novelty, batch_max_sim)
    state.ledger.append("gamma_update", step=t, payload={
        "batch_max_sim": batch_max_sim,
        "ema_similarity": state.novelty.ema_similarity,
        "gamma": gamma_t,
    })

    accepted: list[CandidateEvaluation] = []
    for c in candidates:
        c.breakdown = compose_reward(
            c.level, gamma_t, c.novelty if c.level >= 2 else None, c.accuracy,
            config.calibration, config.loop.quality_enabled, config.loop.diversity_enabled,
        )
        c.decision = decide_admission(
            c.level, bool(c.review_accept), c.accuracy, c.sim, state.novelty.tau_gate
        )
        if c.decision.admitted:
            accepted.append(c)
        state.ledger.append("candidate_decision", step=t, env_id=c.artifact.env_id, payload={
            "level": c.level,
            "accuracy": c.accuracy,
            "sim": c.sim,
            "gamma": gamma_t,
            "novelty": c.novelty,
            "r_gen": c.breakdown.r_gen,
            "admitted": c.decision.admitted,
            "sub_predicates": c.decision.sub_predicates,
            "review_held": c.review_accept is None and c.level == 5,
        })

    groups: list[RolloutGroup] = []
    for p in range(config.loop.generator_prompts_per_step):
        members = [c for c in candidates if c.group_index == p]
        group = RolloutGroup(
            role="generator",
            group_key=f"gen-{t:04d}-p{p:02d}",
            items=[(_digest(c.artifact.source), c.breakdown.r_gen) for c in members],
        )
        group.normalize()
        groups.append(group)

    # (5) solver groups over the active pool plus this step's accepted set
    accepted_by_id = {c.artifact.env_id: c for c in accepted}
    solver_scores: list[float] = []
    for j in range(config.loop.solver_batch):
        env_id = sample_env(state.pool, rng_solver, tuple(accepted_by_id))
        if env_id in accepted_by_id:
            accepted_by_id[env_id].draws += 1
            artifact = accepted_by_id[env_id].artifact
        else:
            artifact = state.pool.artifacts[env_id]
        try:
            with runner.launch(artifact, config.limits) as handle:
                instance_seed = rng_solver.randrange(2**31)
                record = runner.generate(handle, instance_seed, config.loop.solver_difficulty)
                items = []
                rewards = []
                from .calibration import ResponseOracle

                for _ in range(config.loop.solver_group_size):
                    response = clients.solver.respond(record.prompt, ResponseOracle(handle, record))
                    result = runner.score(handle, record, response)
                    items.append((_digest(response), result.score))
                    rewards.append(result.score)
        except RunnerError as exc:
            state.ledger.append("solver_group_failed", step=t, env_id=env_id,
                                payload={"error": str(exc)})
            continue
        solver_scores.extend(rewards)
        state.ledger.append("solver_group", step=t, env_id=env_id, payload={
            "instance_seed": instance_seed,
            "group_size": len(rewards),
            "mean_score": sum(rewards) / len(rewards) if rewards else 0.0,
        })
        group = RolloutGroup(role="solver", group_key=f"sol-{t:04d}-b{j:02d}-{env_id}", items=items)
        group.normalize()
        groups.append(group)

    # (7) pool update: admissions, embeddings, tags, then rotation on cadence
    for c in accepted:
        entry = PoolEntry(
            env_id=c.artifact.env_id,
            origin="generated",
            epochs_used=c.draws // state.pool.draws_per_epoch,
            admitted_step=t,
            tags=c.tags,
            draws=c.draws,
        )
        new_prototype = admit(state.pool, entry, c.artifact)
        admit_embeddings(state.novelty, c.artifact.env_id, c.views)
        state.admitted_total += 1
        state.ledger.append("pool_admit", step=t, env_id=c.artifact.env_id, payload={
            "tags": sorted(c.tags),
            "new_prototype": new_prototype,
            "draws_at_admission": c.draws,
        })
        state.ledger.append("novelty_admit", step=t, env_id=c.artifact.env_id, payload={
            "prompt_cache": len(state.novelty.prompt_cache),
            "code_cache": len(state.novelty.code_cache),
        })
    if state.pool.rotation_cadence and t % state.pool.rotation_cadence == 0:
        result = rotate(state.pool)
        state.ledger.append("pool_rotate", step=t, payload={
            "retired": list(result.retired),
            "floor_kept": list(result.floor_kept),
            "active": len(state.pool.active),
            "seed_share": state.pool.seed_share(),
        })

    generator_rewards = [c.breakdown.r_gen for c in candidates]
    report = StepReport(
        step=t,
        candidates_evaluated=len(candidates),
        accepted_count=len(accepted),
        level_histogram={level: sum(1 for c in candidates if c.level == level) for level in range(6)},
        mean_generator_reward=sum(generator_rewards) / len(generator_rewards) if generator_rewards else 0.0,
        mean_solver_score=sum(solver_scores) / len(solver_scores) if solver_scores else 0.0,
        gamma=gamma_t,
        ema_similarity=state.novelty.ema_similarity,
        pool_active=len(state.pool.active),
        pool_retired=len(state.pool.retired_ids),
        fewshot_size=len(state.pool.fewshot_ids),
        prototype_count=len(state.pool.registry.prototypes),
        admitted_total=state.admitted_total,
    )
    state.ledger.append("step_report", step=t, payload=report.csv_row())
    return report, groups


def export_batches(groups: list[RolloutGroup], config: RunConfig, sink_path: str | Path) -> Path:
    """Append-only trainer rows, bit-stable ordering for replay."""
    import json

    sink_path = Path(sink_path)
    try:
        sink_path.parent.mkdir(parents=True, exist_ok=True)
        with sink_path.open("w") as handle:
            for group in groups:
                for (trajectory_ref, raw_reward), advantage in zip(group.items, group.advantages):
                    row = {
                        "role": group.role,
                        "group_key": group.group_key,
                        "trajectory_ref": trajectory_ref,
                        "raw_reward": raw_reward,
                        "advantage": advantage,
                        "weight": config.loop.w_gen if group.role == "generator" else 1.0,
                        "beta_kl": config.loop.beta_kl,
                    }
                    handle.write(json.dumps(row, sort_keys=True) + "\n")
    except OSError as exc:
        raise SinkUnavailable(f"cannot write batch file {sink_path}: {exc}") from exc
    return sink_path


def evaluate_holdout(solver, envs: list[EnvArtifact], n_per_env: int,
                     limits=DEFAULT_LIMITS, difficulty: int = 2,
                     seed_base: int = 900_000) -> float:
    """Held-out pass rate over fixed environments; never touches pool state."""
    if not envs:
        raise EmptyPool("no held-out environments")
    from .calibration import ResponseOracle

    successes = 0
    total = 0
    for env_index, artifact in enumerate(envs):
        with runner.launch(artifact, limits) as handle:
            for i in range(n_per_env):
                record = runner.generate(handle, seed_base + env_index * n_per_env + i, difficulty)
                response = solver.respond(record.prompt, ResponseOracle(handle, record))
                result = runner.score(handle, record, response)
                total += 1
                if result.score > 0:
                    successes += 1
    return successes / total


def run(config: RunConfig, run_dir: str | Path, clients: PolicyClients | None = None,
        seed_artifacts: list[EnvArtifact] | None = None) -> tuple[list[StepReport], str]:
    """Full scripted run: lock the run directory, execute config.loop.steps
    steps, persist metrics/batches/manifest/cache, return reports and the
    final ledger digest."""
    import json

    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    lock_path = run_dir / "lock"
    lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    try:
        (run_dir / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True))
        (run_dir / "trainer_metadata.json").write_text(
            json.dumps(trainer_metadata(config), indent=2, sort_keys=True))
        ledger = RunLedger(run_dir / "ledger.jsonl")
        ledger.append("run_config", step=0, payload={"config_digest": _digest(
            json.dumps(config.to_dict(), sort_keys=True))})
        if clients is None:
            clients = scripted_clients(config.run_seed, config.bug_rate, config.solver_p)
        state = init_run_state(config, ledger, seed_artifacts)

        reports: list[StepReport] = []
        metrics_path = run_dir / "metrics.csv"
        with metrics_path.open("w", newline="") as metrics_file:
            writer = csv.DictWriter(metrics_file, fieldnames=CSV_FIELDS)
            writer.writeheader()
            for _ in range(config.loop.steps):
                report, groups = run_step(state, clients)
                batch_path = run_dir / "batches" / f"step-{state.step:04d}.jsonl"
                export_batches(groups, config, batch_path)
                ledger.append("batch_export", step=state.step, payload={
                    "file": batch_path.name,
                    "rows": sum(len(g.items) for g in groups),
                    "file_digest": _digest(batch_path.read_text()),
                })
                writer.writerow(report.csv_row())
                reports.append(report)

        from .pool import save_manifest

        save_manifest(state.pool, run_dir / "pool_manifest.json")
        save_cache(state.novelty, run_dir / "novelty_cache.json")
        final = ledger.final_digest
        ledger.close()
        return reports, final
    finally:
        os.close(lock_fd)
        lock_path.unlink(missing_ok=True)
