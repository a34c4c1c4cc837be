"""Seed catalog: resolves seed sources and builds artifact descriptions that
the orchestration framework's validator and CLI consume directly."""

from __future__ import annotations

import json
import sys
from pathlib import Path

from .serve import load_environment

SEEDS_DIR = Path(__file__).parent / "seeds"

SEED_FILES = {
    "sorting": "sorting.py",
    "sliding_window": "sliding_window.py",
    "monotonic_stack": "monotonic_stack.py",
    "knapsack": "knapsack.py",
    "subset_sum": "subset_sum.py",
    "interval_intersection": "interval_intersection.py",
    "bridge": "bridge.py",
    "euclid_game": "euclid_game.py",
    "fibonacci": "fibonacci.py",
    "recursive_function": "recursive_function.py",
}


def seed_names() -> list[str]:
    return list(SEED_FILES)


def seed_source(name: str) -> str:
    return (SEEDS_DIR / SEED_FILES[name]).read_text()


def load_seed(name: str):
    """In-process instance, for oracle tests and local tooling."""
    return load_environment(seed_source(name))


def entry_command() -> str:
    return f"{sys.executable} -m envkit.serve {{source_file}}"


def seed_artifact_dict(name: str) -> dict:
    source = seed_source(name)
    env = load_environment(source)
    return {
        "env_id": f"seed-{name}",
        "source": source,
        "entry_command": entry_command(),
        "prompt_template": env.prompt_template,
        "origin": "seed",
        "created_step": 0,
    }


def write_artifact_files(directory: str | Path) -> list[Path]:
    """One artifact description file per seed, ready for `validate`."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name in SEED_FILES:
        path = directory / f"seed-{name}.json"
        path.write_text(json.dumps(seed_artifact_dict(name), indent=2))
        written.append(path)
    return written


if __name__ == "__main__":
    import argparse

    parser = argparse.ArgumentParser(prog="envkit.catalog")
    parser.add_argument("command", choices=["export-artifacts"])
    parser.add_argument("--out", default="seed-artifacts")
    args = parser.parse_args()
    paths = write_artifact_files(args.out)
    print(f"wrote {len(paths)} artifact files to {args.out}")
