"""Append-only run ledger with a tamper-evident digest chain.

Each event's digest covers the previous event's digest plus the event's
canonical form, so two runs with the same config seed can be compared by
their final digest alone. Wall-clock time is recorded for humans but kept out
of the digest (replays must digest identically).
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import CorruptLedger

GENESIS_DIGEST = "0" * 64


def _canonical(core: dict) -> str:
    return json.dumps(core, sort_keys=True, separators=(",", ":"))


def _chain(prev_digest: str, core: dict) -> str:
    return hashlib.sha256((prev_digest + "\n" + _canonical(core)).encode()).hexdigest()


class RunLedger:
    def __init__(self, path: str | Path | None = None):
        self.path = Path(path) if path is not None else None
        self.events: list[dict] = []
        self._last_digest = GENESIS_DIGEST
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self._file = self.path.open("a")
        else:
            self._file = None

    @property
    def final_digest(self) -> str:
        return self._last_digest

    def append(self, kind: str, step: int | None = None, env_id: str | None = None,
               payload: dict | None = None) -> dict:
        core = {
            "seq": len(self.events),
            "step": step,
            "kind": kind,
            "env_id": env_id,
            "payload": payload or {},
        }
        digest = _chain(self._last_digest, core)
        event = dict(core)
        event["digest"] = digest
        event["wall_time"] = time.time()
        self.events.append(event)
        self._last_digest = digest
        if self._file is not None:
            self._file.write(json.dumps(event, sort_keys=True) + "\n")
            self._file.flush()
        return event

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None


@dataclass(frozen=True)
class LedgerVerification:
    ok: bool
    events: int
    final_digest: str
    first_bad_seq: int | None = None
    detail: str = ""


def verify_file(path: str | Path) -> LedgerVerification:
    """Recompute the digest chain; report the first divergence."""
    path = Path(path)
    if not path.exists():
        raise CorruptLedger(f"no ledger at {path}")
    prev = GENESIS_DIGEST
    count = 0
    for lineno, line in enumerate(path.read_text().splitlines()):
        if not line.strip():
            continue
        try:
            event = json.loads(line)
        except ValueError as exc:
            raise CorruptLedger(f"line {lineno + 1}: not JSON: {exc}") from exc
        core = {k: event.get(k) for k in ("seq", "step", "kind", "env_id", "payload")}
        expected = _chain(prev, core)
        if core.get("seq") != count:
            return LedgerVerification(False, count, prev, first_bad_seq=count,
                                      detail=f"sequence gap at line {lineno + 1}")
        if event.get("digest") != expected:
            return LedgerVerification(False, count, prev, first_bad_seq=count,
                                      detail=f"digest mismatch at seq {count}")
        prev = expected
        count += 1
    return LedgerVerification(True, count, prev)
