"""Protocol server: runs one environment source file over stdin/stdout.

Usage: python -m envkit.serve SOURCE_FILE [--class-name NAME]

One JSON object per line. Requests carry {v, op, correlation_id, ...};
responses echo the correlation_id with ok=true and the op's fields, or
ok=false with a structured error. Protocol violations are answered, never
silently dropped, so the framework's conformance probe can observe load
failures as structured errors.
"""

from __future__ import annotations

import argparse
import json
import sys

from .base import VerifiableTask, parse_int, parse_int_list


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def load_namespace(source: str) -> dict:
    """Execute an environment source with the kit base injected."""
    namespace = {
        "VerifiableTask": VerifiableTask,
        "parse_int_list": parse_int_list,
        "parse_int": parse_int,
    }
    exec(compile(source, "<environment>", "exec"), namespace)
    return namespace


def load_environment(source: str, class_name: str | None = None) -> VerifiableTask:
    namespace = load_namespace(source)
    candidates = [
        value for value in namespace.values()
        if isinstance(value, type) and issubclass(value, VerifiableTask)
        and value is not VerifiableTask
    ]
    if class_name is not None:
        for cls in candidates:
            if cls.__name__ == class_name:
                return cls()
        raise LookupError(f"no class named {class_name}")
    if not candidates:
        raise LookupError("source defines no VerifiableTask subclass")
    return candidates[-1]()


class _Server:
    def __init__(self, source_path: str, class_name: str | None):
        self.source_path = source_path
        self.class_name = class_name
        self.env: VerifiableTask | None = None
        self.load_error: str | None = None

    def _ensure_loaded(self):
        if self.env is not None or self.load_error is not None:
            return
        try:
            source = open(self.source_path).read()
            self.env = load_environment(source, self.class_name)
        except Exception as exc:
            self.load_error = f"{type(exc).__name__}: {exc}"

    def handle(self, msg: dict) -> tuple[dict, bool]:
        cid = msg.get("correlation_id")
        op = msg.get("op")
        out: dict = {"correlation_id": cid, "ok": True}
        if op == "shutdown":
            return out, True
        self._ensure_loaded()
        if op == "conformance":
            if self.load_error is not None:
                return {"correlation_id": cid, "ok": False,
                        "error": {"kind": "load_error", "detail": self.load_error}}, False
            out["class_name"] = type(self.env).__name__
            out["entry_points"] = self.env.entry_points()
            out["prompt_template"] = self.env.prompt_template
            return out, False
        if self.load_error is not None:
            return {"correlation_id": cid, "ok": False,
                    "error": {"kind": "load_error", "detail": self.load_error}}, False
        if op == "generate":
            latent, reference = self.env.generate(int(msg["seed"]), int(msg["difficulty"]))
            out["latent"] = canonical(latent)
            out["reference"] = canonical(reference)
        elif op == "render":
            out["prompt"] = self.env.render(json.loads(msg["latent"]))
        elif op == "score":
            latent = json.loads(msg["latent"])
            reference = json.loads(msg["reference"])
            parsed = self.env.process(msg.get("response", ""))
            if parsed is None:
                out.update(score=0.0, parsed=None, parse_failed=True)
            else:
                value = float(self.env.score(parsed, latent, reference))
                out.update(score=value, parsed=parsed, parse_failed=False)
        elif op == "render_answer":
            out["response_text"] = self.env.render_answer(json.loads(msg["reference"]))
        else:
            return {"correlation_id": cid, "ok": False,
                    "error": {"kind": "bad_op", "detail": str(op)}}, False
        return out, False

    def run(self) -> int:
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
            except ValueError:
                sys.stdout.write(json.dumps({
                    "correlation_id": None, "ok": False,
                    "error": {"kind": "bad_request", "detail": "unparseable line"},
                }) + "\n")
                sys.stdout.flush()
                continue
            try:
                out, stop = self.handle(msg)
            except Exception as exc:
                out = {"correlation_id": msg.get("correlation_id"), "ok": False,
                       "error": {"kind": type(exc).__name__, "detail": str(exc)}}
                stop = False
            sys.stdout.write(json.dumps(out) + "\n")
            sys.stdout.flush()
            if stop:
                return 0
        return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="envkit.serve")
    parser.add_argument("source", help="environment source file")
    parser.add_argument("--class-name", default=None)
    args = parser.parse_args(argv)
    return _Server(args.source, args.class_name).run()


if __name__ == "__main__":
    raise SystemExit(main())
