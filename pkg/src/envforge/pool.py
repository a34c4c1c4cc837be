"""Active-pool ownership: admission, rotation with a protected seed floor,
epoch accounting, few-shot context sampling, and the tag-prototype registry.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .artifacts import EnvArtifact
from .errors import DuplicateId, EmptyPool

# Keyword tagger: a stand-in for semantic tagging. Keys are substrings matched
# against the lowercased template+source; values are the tags they imply.
DEFAULT_TAG_KEYWORDS: dict[str, tuple[str, ...]] = {
    "sort": ("ordering",),
    "ascending": ("ordering",),
    "descending": ("ordering",),
    "arrange": ("ordering",),
    "sum": ("aggregation",),
    "total": ("aggregation",),
    "add up": ("aggregation",),
    "largest": ("extremum",),
    "smallest": ("extremum",),
    "max": ("extremum",),
    "min": ("extremum",),
    "spread": ("range_span",),
    "distinct": ("counting", "set"),
    "count": ("counting",),
    "mod": ("number_theory", "modular"),
    "remainder": ("number_theory", "modular"),
    "prime": ("number_theory",),
    "gcd": ("number_theory",),
    "graph": ("graph_path",),
    "edge": ("graph_path",),
    "bridge": ("graph_path", "connectivity"),
    "window": ("sliding_window",),
    "subset": ("subset_sum", "feasibility"),
    "multiset": ("feasibility",),
    "interval": ("intervals",),
    "knapsack": ("optimization",),
    "budget": ("optimization",),
    "winner": ("game_theory",),
    "game": ("game_theory",),
    "recurrence": ("sequence",),
    "fibonacci": ("sequence",),
    "sequence": ("sequence",),
}


def tag_artifact(artifact: EnvArtifact,
                 keyword_map: dict[str, tuple[str, ...]] | None = None) -> set[str]:
    keyword_map = keyword_map or DEFAULT_TAG_KEYWORDS
    text = (artifact.prompt_template + "\n" + artifact.source).lower()
    tags: set[str] = set()
    for keyword, implied in keyword_map.items():
        if keyword in text:
            tags.update(implied)
    return tags


@dataclass
class TagPrototypeRegistry:
    prototypes: list[frozenset[str]] = field(default_factory=list)
    jaccard_threshold: float = 0.5


def register_tags(registry: TagPrototypeRegistry, tags: set[str]) -> tuple[TagPrototypeRegistry, bool]:
    """Register a new prototype iff the tag set's Jaccard similarity to every
    existing prototype is strictly below the threshold. Empty tag sets are
    never registered. Integer arithmetic keeps the strict-< exact."""
    if not tags:
        return registry, False
    candidate = frozenset(tags)
    for prototype in registry.prototypes:
        inter = len(candidate & prototype)
        union = len(candidate | prototype)
        # J >= 0.5  <=>  2*|inter| >= |union|
        if 2 * inter >= union:
            return registry, False
    registry.prototypes.append(candidate)
    return registry, True


@dataclass(eq=False)
class PoolEntry:
    env_id: str
    origin: str
    epochs_used: int = 0
    admitted_step: int = 0
    tags: set[str] = field(default_factory=set)
    draws: int = 0


@dataclass
class PoolState:
    active: list[PoolEntry] = field(default_factory=list)
    retired_ids: list[str] = field(default_factory=list)
    seed_ids: list[str] = field(default_factory=list)
    artifacts: dict[str, EnvArtifact] = field(default_factory=dict)
    step: int = 0
    rotation_cadence: int = 10
    max_epochs: int = 5
    seed_floor: float = 0.2
    draws_per_epoch: int = 4
    registry: TagPrototypeRegistry = field(default_factory=TagPrototypeRegistry)

    @property
    def fewshot_ids(self) -> list[str]:
        """Few-shot pool: original seeds plus every retired environment."""
        seen = dict.fromkeys(self.seed_ids)
        seen.update(dict.fromkeys(self.retired_ids))
        return list(seen)

    @property
    def active_ids(self) -> list[str]:
        return [entry.env_id for entry in self.active]

    def entry(self, env_id: str) -> PoolEntry:
        for entry in self.active:
            if entry.env_id == env_id:
                return entry
        raise KeyError(env_id)

    def seed_share(self) -> float:
        if not self.active:
            return 0.0
        seeds = sum(1 for e in self.active if e.origin == "seed")
        return seeds / len(self.active)


def init_pool(seed_artifacts: list[EnvArtifact], **knobs) -> PoolState:
    state = PoolState(**knobs)
    for artifact in seed_artifacts:
        entry = PoolEntry(env_id=artifact.env_id, origin="seed", admitted_step=0,
                          tags=tag_artifact(artifact))
        state.active.append(entry)
        state.seed_ids.append(artifact.env_id)
        state.artifacts[artifact.env_id] = artifact
        register_tags(state.registry, entry.tags)
    return state


def admit(state: PoolState, entry: PoolEntry, artifact: EnvArtifact) -> bool:
    """Append an admitted environment; returns whether its tag set opened a
    new prototype."""
    known = set(state.active_ids) | set(state.retired_ids) | set(state.seed_ids)
    if entry.env_id in known:
        raise DuplicateId(f"{entry.env_id} already in the pool ledger")
    state.active.append(entry)
    state.artifacts[entry.env_id] = artifact
    _, is_new = register_tags(state.registry, entry.tags)
    return is_new


@dataclass(frozen=True)
class RotationResult:
    retired: tuple[str, ...]
    floor_kept: tuple[str, ...]


def rotate(state: PoolState) -> RotationResult:
    """Retire every entry that exhausted its epoch budget, oldest first.

    A seed entry stays if retiring it would drop seed-origin entries below
    seed_floor x (pool size at rotation start); the pool never empties. Kept
    entries are re-enlisted (epoch counter reset) so the epoch bound stays
    meaningful."""
    if state.rotation_cadence > 0 and state.step % state.rotation_cadence != 0:
        raise ValueError(
            f"rotate called at step {state.step}, cadence {state.rotation_cadence}"
        )
    start_size = len(state.active)
    floor_count = state.seed_floor * start_size - 1e-9
    position = {id(e): i for i, e in enumerate(state.active)}
    eligible = sorted(
        (e for e in state.active if e.epochs_used >= state.max_epochs),
        key=lambda e: (e.admitted_step, position[id(e)]),
    )
    retired: list[str] = []
    kept: list[str] = []
    for entry in eligible:
        seeds_now = sum(1 for e in state.active if e.origin == "seed")
        if len(state.active) == 1:
            kept.append(entry.env_id)
            entry.epochs_used = 0
            entry.draws = 0
            continue
        if entry.origin == "seed" and seeds_now - 1 < floor_count:
            kept.append(entry.env_id)
            entry.epochs_used = 0
            entry.draws = 0
            continue
        state.active.remove(entry)
        state.retired_ids.append(entry.env_id)
        retired.append(entry.env_id)
    return RotationResult(retired=tuple(retired), floor_kept=tuple(kept))


def sample_env(state: PoolState, rng: random.Random,
               extra_ids: tuple[str, ...] = ()) -> str:
    """Uniform draw over the active pool plus this step's accepted set.

    Draws on active entries advance their epoch accounting."""
    population = state.active_ids + list(extra_ids)
    if not population:
        raise EmptyPool("no environments to sample")
    env_id = population[rng.randrange(len(population))]
    try:
        entry = state.entry(env_id)
    except KeyError:
        return env_id  # same-step accepted candidate; caller tracks its draws
    entry.draws += 1
    entry.epochs_used = entry.draws // state.draws_per_epoch
    return env_id


def fewshot_context(state: PoolState, k: int, rng: random.Random) -> list[EnvArtifact]:
    """Sample k few-shot artifacts (clamped to the pool size)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    population = state.fewshot_ids
    if not population:
        raise EmptyPool("few-shot pool is empty")
    chosen = rng.sample(population, min(k, len(population)))
    return [state.artifacts[env_id] for env_id in chosen]


def save_manifest(state: PoolState, path: str | Path) -> None:
    payload = {
        "step": state.step,
        "rotation_cadence": state.rotation_cadence,
        "max_epochs": state.max_epochs,
        "seed_floor": state.seed_floor,
        "draws_per_epoch": state.draws_per_epoch,
        "seed_ids": state.seed_ids,
        "retired": state.retired_ids,
        "active": [
            {
                "env_id": e.env_id,
                "origin": e.origin,
                "epochs_used": e.epochs_used,
                "admitted_step": e.admitted_step,
                "tags": sorted(e.tags),
                "draws": e.draws,
            }
            for e in state.active
        ],
        "prototypes": [sorted(p) for p in state.registry.prototypes],
        "artifacts": {env_id: a.to_dict() for env_id, a in state.artifacts.items()},
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True))


def load_manifest(path: str | Path) -> PoolState:
    payload = json.loads(Path(path).read_text())
    state = PoolState(
        step=payload["step"],
        rotation_cadence=payload["rotation_cadence"],
        max_epochs=payload["max_epochs"],
        seed_floor=payload["seed_floor"],
        draws_per_epoch=payload.get("draws_per_epoch", 4),
        seed_ids=list(payload["seed_ids"]),
        retired_ids=list(payload["retired"]),
    )
    for row in payload["active"]:
        state.active.append(PoolEntry(
            env_id=row["env_id"],
            origin=row["origin"],
            epochs_used=row["epochs_used"],
            admitted_step=row["admitted_step"],
            tags=set(row["tags"]),
            draws=row.get("draws", 0),
        ))
    state.registry = TagPrototypeRegistry(
        prototypes=[frozenset(p) for p in payload["prototypes"]]
    )
    for env_id, data in payload.get("artifacts", {}).items():
        state.artifacts[env_id] = EnvArtifact.from_dict(data)
    return state
