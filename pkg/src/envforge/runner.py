"""Sandboxed execution of environment programs and the call-level API.

Each handle owns one environment: either a supervised subprocess speaking the
newline-delimited protocol, or an in-process mock (see mocks.py). Handles are
single-owner; distinct handles are independent, and killing a timed-out
subprocess never blocks other handles (each has its own reader thread).
"""

from __future__ import annotations

import os
import queue
import re
import shlex
import signal
import subprocess
import tempfile
import threading
import time
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .artifacts import DEFAULT_LIMITS, EnvArtifact, InstanceRecord, RunnerLimits, ScoreResult
from .errors import (
    CallTimeout,
    EnvCrash,
    LaunchFailure,
    LimitViolation,
    ProtocolError,
    RenderUnavailable,
)
from .protocol import decode_response, encode_request

_SITECUSTOMIZE_GUARD = """\
import socket

def _deny(*args, **kwargs):
    raise OSError("network access is disabled in the environment sandbox")

socket.socket = _deny
socket.create_connection = _deny
socket.socketpair = _deny
"""


class EnvHandle:
    """Base class: request/response with correlation ids and op accounting."""

    def __init__(self) -> None:
        self._next_correlation = 0
        self.op_counts: Counter[str] = Counter()
        self.closed = False

    def request(self, op: str, **payload) -> dict:
        self._next_correlation += 1
        cid = self._next_correlation
        self.op_counts[op] += 1
        response = self._exchange(op, cid, payload)
        if response.get("correlation_id") != cid:
            raise ProtocolError(
                f"correlation mismatch: sent {cid}, got {response.get('correlation_id')!r}"
            )
        if not response.get("ok", False):
            error = response.get("error") or {}
            raise ProtocolError(f"environment error on {op}: {error}")
        return response

    def _exchange(self, op: str, correlation_id: int, payload: dict) -> dict:
        raise NotImplementedError

    def close(self) -> None:
        raise NotImplementedError

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False


class SubprocessHandle(EnvHandle):
    """Protocol endpoint over a sandboxed child process."""

    def __init__(self, process: subprocess.Popen, limits: RunnerLimits, workdir: tempfile.TemporaryDirectory):
        super().__init__()
        self._process = process
        self._limits = limits
        self._workdir = workdir
        self._lines: queue.Queue = queue.Queue()
        self._reader = threading.Thread(target=self._pump, daemon=True)
        self._reader.start()

    def _pump(self) -> None:
        stream = self._process.stdout
        cap = self._limits.max_output_bytes
        try:
            while True:
                line = stream.readline(cap + 1)
                if not line:
                    self._lines.put(None)  # EOF
                    return
                if len(line) > cap:
                    self._lines.put(LimitViolation(f"response line exceeds {cap} bytes"))
                    return
                if line.strip():
                    self._lines.put(line)
        except Exception as exc:  # reader must never die silently
            self._lines.put(EnvCrash(f"reader failed: {exc}"))

    def _exchange(self, op: str, correlation_id: int, payload: dict) -> dict:
        if self.closed or self._process.poll() is not None:
            raise EnvCrash("environment process is not running")
        request = encode_request(op, correlation_id, **payload)
        try:
            self._process.stdin.write(request + "\n")
            self._process.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise EnvCrash(f"environment closed stdin pipe: {exc}") from exc
        deadline = time.monotonic() + self._limits.wall_clock_timeout
        while True:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._kill()
                raise CallTimeout(
                    f"{op} exceeded wall-clock cap of {self._limits.wall_clock_timeout}s"
                )
            try:
                item = self._lines.get(timeout=min(remaining, 0.2))
            except queue.Empty:
                continue
            if item is None:
                raise EnvCrash(f"environment exited during {op}")
            if isinstance(item, Exception):
                self._kill()
                raise item
            try:
                return decode_response(item)
            except ValueError as exc:
                raise ProtocolError(f"unparseable response line: {exc}") from exc

    def _kill(self) -> None:
        if self._process.poll() is None:
            try:
                os.killpg(os.getpgid(self._process.pid), signal.SIGKILL)
            except (ProcessLookupError, PermissionError, OSError):
                self._process.kill()
        self.closed = True

    def close(self) -> None:
        if self.closed:
            return
        if self._process.poll() is None:
            try:
                self._next_correlation += 1
                self.op_counts["shutdown"] += 1
                request = encode_request("shutdown", self._next_correlation)
                self._process.stdin.write(request + "\n")
                self._process.stdin.flush()
                self._process.wait(timeout=2.0)
            except Exception:
                self._kill()
        self.closed = True
        self._workdir.cleanup()


def _child_env(workdir: str) -> dict:
    env = {
        "PATH": os.environ.get("PATH", "/usr/bin:/bin"),
        "HOME": workdir,
        "LC_ALL": "C",
        "PYTHONPATH": workdir,  # picks up the sitecustomize network guard
        "PYTHONDONTWRITEBYTECODE": "1",
        "PYTHONHASHSEED": "0",
        "PYTHONUNBUFFERED": "1",
    }
    return env


def launch(artifact: EnvArtifact, limits: RunnerLimits = DEFAULT_LIMITS) -> EnvHandle:
    """Start the environment program and return a live protocol handle.

    Mock artifacts get an in-process handle; everything else runs as a
    supervised subprocess with a fresh working directory, a whitelisted
    environment, a network guard, and per-call wall-clock enforcement.
    """
    if artifact.is_mock:
        from .mocks import launch_mock  # local import to avoid a cycle

        return launch_mock(artifact, limits)

    workdir = tempfile.TemporaryDirectory(prefix="envforge-run-")
    root = Path(workdir.name)
    source_file = root / "environment_source.py"
    source_file.write_text(artifact.source)
    (root / "sitecustomize.py").write_text(_SITECUSTOMIZE_GUARD)

    command = artifact.entry_command.replace("{source_file}", str(source_file))
    argv = shlex.split(command)
    if not argv:
        workdir.cleanup()
        raise LaunchFailure("empty entry_command")

    def _pre_exec() -> None:
        os.setsid()
        try:
            import resource

            cpu_cap = int(limits.wall_clock_timeout) + 10
            resource.setrlimit(resource.RLIMIT_CPU, (cpu_cap, cpu_cap))
            resource.setrlimit(resource.RLIMIT_FSIZE, (64 * 1024 * 1024, 64 * 1024 * 1024))
        except Exception:
            pass

    try:
        process = subprocess.Popen(
            argv,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            stderr=subprocess.DEVNULL,
            cwd=workdir.name,
            env=_child_env(workdir.name),
            text=True,
            bufsize=1,
            preexec_fn=_pre_exec,
        )
    except (OSError, ValueError) as exc:
        workdir.cleanup()
        raise LaunchFailure(f"cannot start {argv[0]!r}: {exc}") from exc

    # Grace window to catch programs that exit immediately; long enough to
    # cover interpreter startup.
    deadline = time.monotonic() + 0.3
    while time.monotonic() < deadline:
        if process.poll() is not None:
            workdir.cleanup()
            raise LaunchFailure(
                f"environment exited immediately with code {process.returncode}"
            )
        time.sleep(0.025)
    return SubprocessHandle(process, limits, workdir)


def generate(handle: EnvHandle, seed: int, difficulty: int) -> InstanceRecord:
    """One generate+render round folded into a single record.

    Identical (seed, difficulty) on the same artifact must yield byte-identical
    records; the validator checks that at L3.
    """
    if difficulty < 1:
        raise ValueError(f"difficulty must be >= 1, got {difficulty}")
    resp = handle.request("generate", seed=seed, difficulty=difficulty)
    latent = resp.get("latent")
    reference = resp.get("reference")
    if not isinstance(latent, str) or not isinstance(reference, str):
        raise ProtocolError("generate response must carry opaque string latent/reference")
    rendered = handle.request("render", latent=latent)
    prompt = rendered.get("prompt")
    if not isinstance(prompt, str) or not prompt:
        raise ProtocolError("render response must carry a non-empty prompt")
    return InstanceRecord(seed=seed, difficulty=difficulty, latent=latent,
                          reference=reference, prompt=prompt)


def score(handle: EnvHandle, record: InstanceRecord, response: str) -> ScoreResult:
    """Score a response with the frozen environment program.

    The framework never computes task correctness itself; it only validates the
    contract (score in [0,1], parse failures score zero)."""
    resp = handle.request(
        "score", latent=record.latent, reference=record.reference, response=response
    )
    raw_score = resp.get("score")
    parse_failed = bool(resp.get("parse_failed", False))
    if not isinstance(raw_score, (int, float)) or isinstance(raw_score, bool):
        raise ProtocolError(f"score must be numeric, got {raw_score!r}")
    value = float(raw_score)
    if not 0.0 <= value <= 1.0:
        raise ProtocolError(f"score {value} outside [0, 1]")
    if parse_failed and value != 0.0:
        raise ProtocolError("parse_failed responses must score 0")
    return ScoreResult(score=value, parsed=resp.get("parsed"),
                       parse_failed=parse_failed, raw_response=response)


def render_answer(handle: EnvHandle, reference: str) -> str:
    """Ask the environment to render its reference as a correct response."""
    try:
        resp = handle.request("render_answer", reference=reference)
    except ProtocolError as exc:
        raise RenderUnavailable(str(exc)) from exc
    text = resp.get("response_text")
    if not isinstance(text, str):
        raise RenderUnavailable("render_answer returned no response_text")
    return text


def conformance(handle: EnvHandle) -> dict:
    """Conformance probe used by L1: declared entry points and template."""
    return handle.request("conformance")


@dataclass(frozen=True)
class ImportViolation:
    module: str
    line: int

    def __str__(self) -> str:
        return f"line {self.line}: import of {self.module!r} not in allowlist"


_IMPORT_RE = re.compile(r"^\s*(?:import\s+(.+)|from\s+([A-Za-z_.][\w.]*)\s+import\b)")


def scan_imports(artifact: EnvArtifact, limits: RunnerLimits = DEFAULT_LIMITS) -> list[ImportViolation]:
    """Static textual scan of import statements against the allowlist.

    Intentionally language-neutral and conservative; runtime interception is
    not attempted (the subprocess sandbox covers the rest)."""
    allowed = set(limits.import_allowlist)
    violations: list[ImportViolation] = []
    for lineno, line in enumerate(artifact.source.splitlines(), start=1):
        match = _IMPORT_RE.match(line.split("#", 1)[0])
        if not match:
            continue
        if match.group(2) is not None:
            modules = [match.group(2)]
        else:
            modules = [
                part.strip().split(" as ")[0].strip()
                for part in match.group(1).split(",")
            ]
        for module in modules:
            base = module.split(".")[0]
            if base and base not in allowed:
                violations.append(ImportViolation(module=base, line=lineno))
    return violations
