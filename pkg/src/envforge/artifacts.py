"""Core domain records: artifacts, instances, scores, and runner limits."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path

# Standard-library subset environment programs may import. Enforced by a
# static textual scan (see runner.scan_imports), combined with the no-network
# subprocess sandbox.
DEFAULT_IMPORT_ALLOWLIST = (
    "random",
    "math",
    "collections",
    "itertools",
    "heapq",
    "bisect",
    "functools",
    "re",
    "typing",
)

ORIGINS = ("seed", "generated", "mock")


@dataclass(frozen=True)
class EnvArtifact:
    """A candidate environment: source text plus the handle needed to run it.

    ``entry_command`` is either ``mock:<json>`` for in-process test doubles or
    a shell command; ``{source_file}`` in the command is replaced with the
    path of the materialized source.
    """

    env_id: str
    source: str
    entry_command: str
    prompt_template: str
    origin: str = "generated"
    created_step: int = 0

    def __post_init__(self) -> None:
        if self.origin not in ORIGINS:
            raise ValueError(f"unknown origin {self.origin!r}")
        if self.origin in ("seed", "generated") and not self.source.strip():
            raise ValueError(f"{self.origin} artifact {self.env_id} has empty source")

    @property
    def is_mock(self) -> bool:
        return self.entry_command.startswith("mock:")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "EnvArtifact":
        return cls(
            env_id=data["env_id"],
            source=data.get("source", ""),
            entry_command=data["entry_command"],
            prompt_template=data.get("prompt_template", ""),
            origin=data.get("origin", "generated"),
            created_step=int(data.get("created_step", 0)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "EnvArtifact":
        """Load an artifact description file (JSON). ``source_file`` may be
        given instead of inline ``source``; it is resolved relative to the
        description file."""
        path = Path(path)
        data = json.loads(path.read_text())
        if "source" not in data and "source_file" in data:
            data["source"] = (path.parent / data["source_file"]).read_text()
        return cls.from_dict(data)


@dataclass(frozen=True)
class InstanceRecord:
    """One generated instance: latent and reference cross the wire as opaque
    strings serialized by the environment and are echoed back verbatim."""

    seed: int
    difficulty: int
    latent: str
    reference: str
    prompt: str


@dataclass(frozen=True)
class ScoreResult:
    score: float
    parsed: object = None
    parse_failed: bool = False
    raw_response: str = ""


@dataclass(frozen=True)
class RunnerLimits:
    """Resource caps for one environment subprocess."""

    wall_clock_timeout: float = 30.0
    max_output_bytes: int = 1_000_000
    import_allowlist: tuple[str, ...] = DEFAULT_IMPORT_ALLOWLIST

    def __post_init__(self) -> None:
        if self.wall_clock_timeout <= 0:
            raise ValueError("wall_clock_timeout must be > 0")
        if self.max_output_bytes <= 0:
            raise ValueError("max_output_bytes must be > 0")

    @classmethod
    def from_dict(cls, data: dict) -> "RunnerLimits":
        return cls(
            wall_clock_timeout=float(data.get("wall_clock_timeout", 30.0)),
            max_output_bytes=int(data.get("max_output_bytes", 1_000_000)),
            import_allowlist=tuple(data.get("import_allowlist", DEFAULT_IMPORT_ALLOWLIST)),
        )


DEFAULT_LIMITS = RunnerLimits()
