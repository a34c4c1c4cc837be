"""Two-view similarity, novelty, and the adaptive exploration weight.

Prompt and code views are embedded separately and compared by max-cosine
against caches of previously admitted environments; the exploration weight
rises with an EMA of within-batch maximum similarity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .artifacts import EnvArtifact
from .embedding import EmbeddingProvider, clean_code, extract_generator_body
from .errors import DuplicateId, ExtractionFailure


@dataclass
class NoveltyState:
    prompt_cache: dict[str, np.ndarray] = field(default_factory=dict)
    code_cache: dict[str, np.ndarray] = field(default_factory=dict)
    ema_similarity: float = 0.5
    ema_decay: float = 0.6
    mixture: float = 0.5
    gamma_min: float = 2.0
    gamma_max: float = 5.0
    tau_low: float = 0.45
    tau_high: float = 0.65
    tau_gate: float = 0.8


@dataclass(frozen=True)
class NoveltyScore:
    prompt_sim: float
    code_sim: float
    combined_sim: float
    novelty: float


def embed_views(artifact: EnvArtifact, provider: EmbeddingProvider) -> tuple[np.ndarray, np.ndarray]:
    """Prompt view from the declared template; code view from the cleaned
    generator body. Missing either one is an ExtractionFailure (the caller
    treats that as a failed novelty gate, not as maximal novelty)."""
    template = artifact.prompt_template.strip()
    if not template:
        raise ExtractionFailure(f"{artifact.env_id}: empty prompt template")
    body = extract_generator_body(artifact.source)
    if body is None:
        raise ExtractionFailure(f"{artifact.env_id}: no generator body found")
    cleaned = clean_code(body)
    if not cleaned:
        raise ExtractionFailure(f"{artifact.env_id}: generator body empty after cleaning")
    return provider.embed_text(template), provider.embed_text(cleaned)


def _max_cosine(vec: np.ndarray, cache: dict[str, np.ndarray]) -> float:
    if not cache:
        return 0.0
    matrix = np.stack(list(cache.values()))
    return float(np.max(matrix @ vec))


def similarity(views: tuple[np.ndarray, np.ndarray], state: NoveltyState) -> NoveltyScore:
    prompt_vec, code_vec = views
    prompt_sim = _max_cosine(prompt_vec, state.prompt_cache)
    code_sim = _max_cosine(code_vec, state.code_cache)
    combined = state.mixture * prompt_sim + (1.0 - state.mixture) * code_sim
    return NoveltyScore(prompt_sim=prompt_sim, code_sim=code_sim,
                        combined_sim=combined, novelty=1.0 - combined)


def gamma_for(state: NoveltyState, ema: float | None = None) -> float:
    """Clipped linear schedule from the similarity EMA to the exploration weight."""
    s = state.ema_similarity if ema is None else ema
    span = state.tau_high - state.tau_low
    ratio = (s - state.tau_low) / span
    ratio = min(1.0, max(0.0, ratio))
    return state.gamma_min + (state.gamma_max - state.gamma_min) * ratio


def update_gamma(state: NoveltyState, batch_max_sim: float) -> float:
    """Fold one batch's maximum similarity into the EMA, then return gamma.

    The decay weights history: ema <- a*ema + (1-a)*batch."""
    if not 0.0 <= batch_max_sim <= 1.0:
        raise ValueError(f"batch_max_sim {batch_max_sim} outside [0, 1]")
    state.ema_similarity = state.ema_decay * state.ema_similarity \
        + (1.0 - state.ema_decay) * batch_max_sim
    return gamma_for(state)


def admit_embeddings(state: NoveltyState, env_id: str,
                     views: tuple[np.ndarray, np.ndarray]) -> NoveltyState:
    """Insert an admitted environment's views; caches only ever grow."""
    if env_id in state.prompt_cache or env_id in state.code_cache:
        raise DuplicateId(f"embeddings for {env_id} already cached")
    prompt_vec, code_vec = views
    state.prompt_cache[env_id] = np.asarray(prompt_vec, dtype=np.float64)
    state.code_cache[env_id] = np.asarray(code_vec, dtype=np.float64)
    return state


def save_cache(state: NoveltyState, path: str | Path) -> None:
    rows = []
    for view_name, cache in (("prompt", state.prompt_cache), ("code", state.code_cache)):
        for env_id, vec in cache.items():
            rows.append({"env_id": env_id, "view": view_name, "vector": vec.tolist()})
    payload = {"ema_similarity": state.ema_similarity, "rows": rows}
    Path(path).write_text(json.dumps(payload))


def load_cache(path: str | Path, state: NoveltyState | None = None) -> NoveltyState:
    state = state or NoveltyState()
    payload = json.loads(Path(path).read_text())
    state.ema_similarity = float(payload["ema_similarity"])
    for row in payload["rows"]:
        cache = state.prompt_cache if row["view"] == "prompt" else state.code_cache
        cache[row["env_id"]] = np.asarray(row["vector"], dtype=np.float64)
    return state
