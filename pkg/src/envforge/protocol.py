"""Wire protocol constants and message helpers.

One JSON object per line over the subprocess's stdin/stdout. See
docs/protocol.md for the full contract.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

PROTOCOL_VERSION = 1

# Core operations; conformance and render_answer are versioned extensions
# used by the validator (static conformance probe, perturbation rendering).
OPS = ("generate", "render", "score", "shutdown", "conformance", "render_answer")

REQUEST_FIELDS = ("op", "correlation_id", "seed", "difficulty", "latent", "reference", "response")
RESPONSE_FIELDS = ("correlation_id", "ok", "latent", "reference", "prompt", "score",
                   "parsed", "parse_failed", "response_text", "class_name",
                   "entry_points", "error")


@dataclass
class ProtocolMessage:
    op: str
    payload: dict
    correlation_id: int

    def __post_init__(self) -> None:
        if self.op not in OPS:
            raise ValueError(f"unknown op {self.op!r}")


def encode_request(op: str, correlation_id: int, **payload) -> str:
    msg = {"v": PROTOCOL_VERSION, "op": op, "correlation_id": correlation_id}
    for key, value in payload.items():
        if value is not None:
            msg[key] = value
    return json.dumps(msg, separators=(",", ":"))


def decode_response(line: str) -> dict:
    """Parse one response line; raises ValueError on non-object payloads."""
    data = json.loads(line)
    if not isinstance(data, dict):
        raise ValueError("response is not an object")
    return data


def canonical_json(obj) -> str:
    """Stable serialization used for digests and opaque payloads."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))
