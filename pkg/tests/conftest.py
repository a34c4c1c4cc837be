import sys
import textwrap

import pytest

from envforge.artifacts import EnvArtifact


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion with a printed pass/fail line"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("criterion")
    if marker:
        status = "PASS" if report.passed else "FAIL"
        print(f"\nACCEPTANCE [{marker.args[0]}] {status}", flush=True)

# A minimal protocol-speaking environment used to exercise the subprocess
# runner without the environment kit. Behavior switches on argv[1].
SUBPROCESS_ENV_SOURCE = textwrap.dedent('''
    import json
    import sys
    import time

    MODE = sys.argv[2] if len(sys.argv) > 2 else "normal"


    def handle(msg):
        op = msg.get("op")
        out = {"correlation_id": msg.get("correlation_id"), "ok": True}
        if op == "generate":
            seed, diff = msg["seed"], msg["difficulty"]
            if MODE == "sleepy":
                time.sleep(60)
            values = [(seed * 17 + i * diff) % 100 for i in range(diff)]
            out["latent"] = json.dumps(values)
            out["reference"] = json.dumps(sorted(values))
        elif op == "render":
            values = json.loads(msg["latent"])
            out["prompt"] = "Sort: " + " ".join(map(str, values))
            if MODE == "huge":
                out["prompt"] += "x" * 2_000_000
        elif op == "score":
            answer = json.loads(msg["reference"])
            try:
                parsed = [int(t) for t in msg["response"].split()]
            except ValueError:
                parsed = None
            if parsed is None:
                out.update(score=0.0, parsed=None, parse_failed=True)
            else:
                out.update(score=float(parsed == answer), parsed=parsed, parse_failed=False)
            if MODE == "badscore":
                out["score"] = 1.5
        elif op == "render_answer":
            answer = json.loads(msg["reference"])
            out["response_text"] = " ".join(map(str, answer))
        elif op == "conformance":
            out["class_name"] = "InlineSorter"
            out["entry_points"] = ["generate", "render", "process", "score", "render_answer"]
            out["prompt_template"] = "Sort: {values}"
        elif op != "shutdown":
            out = {"correlation_id": msg.get("correlation_id"), "ok": False,
                   "error": {"kind": "bad_op", "detail": op}}
        return out, op == "shutdown"


    def main():
        if MODE == "exit_now":
            sys.exit(3)
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            msg = json.loads(line)
            if MODE == "garbage":
                sys.stdout.write("this is not json\\n")
                sys.stdout.flush()
                continue
            out, stop = handle(msg)
            sys.stdout.write(json.dumps(out) + "\\n")
            sys.stdout.flush()
            if stop:
                return


    main()
''')


def subprocess_artifact(mode: str = "normal", env_id: str = "inline-sorter") -> EnvArtifact:
    return EnvArtifact(
        env_id=f"{env_id}-{mode}",
        source=SUBPROCESS_ENV_SOURCE,
        entry_command=f"{sys.executable} {{source_file}} --mode {mode}",
        prompt_template="Sort: {values}",
        origin="generated",
    )


@pytest.fixture
def inline_artifact():
    return subprocess_artifact()
