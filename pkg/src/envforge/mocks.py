"""In-process mock environments.

Each mock speaks the same protocol as a real environment subprocess but runs
inside the framework process, so the whole primary test suite needs no
external environment kit. Every non-faithful behavior targets exactly one
validation layer:

    faithful_sorter   -> passes all five layers
    launch_fail       -> fails at launch (level <= 1)
    nondeterministic  -> fails determinism (level 2)
    constant_output   -> fails non-triviality (level 3)
    permissive_scorer -> accepts perturbed answers (level 4)
    leaky_parser      -> embeds the reference in the prompt (level 4)
    crash_on_score    -> dies on scorer probes (level <= 4)
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass, field, asdict

from .artifacts import EnvArtifact, RunnerLimits
from .errors import EnvCrash, LaunchFailure, ProtocolError
from .protocol import canonical_json
from .runner import EnvHandle

MOCK_BEHAVIORS = (
    "faithful_sorter",
    "launch_fail",
    "nondeterministic",
    "constant_output",
    "permissive_scorer",
    "leaky_parser",
    "crash_on_score",
)

# Reference computations available to mock environments. Answers are always
# lists of ints so one renderer and one scorer cover every family. Entries
# marked parametric consume the spec's param value.
TASKS = {
    "sort_asc": ("sorted values in ascending order", "sorted({v})"),
    "sort_desc": ("sorted values in descending order", "sorted({v}, reverse=True)"),
    "total_sum": ("the sum of all values", "[sum({v})]"),
    "max_value": ("the largest value", "[max({v})]"),
    "min_value": ("the smallest value", "[min({v})]"),
    "distinct_count": ("the count of distinct values", "[len(set({v}))]"),
    "range_span": ("the spread between largest and smallest value", "[max({v}) - min({v})]"),
    "count_above": ("how many values exceed the threshold", "[sum(1 for x in {v} if x > {p})]"),
    "count_below": ("how many values fall under the threshold", "[sum(1 for x in {v} if x < {p})]"),
    "sum_above": ("the sum of values exceeding the threshold", "[sum(x for x in {v} if x > {p})]"),
}

PARAMETRIC_TASKS = ("count_above", "count_below", "sum_above")


def _apply_task(task: str, xs: list[int], param: int = 0) -> list[int]:
    if task == "sort_asc":
        return sorted(xs)
    if task == "sort_desc":
        return sorted(xs, reverse=True)
    if task == "total_sum":
        return [sum(xs)]
    if task == "max_value":
        return [max(xs)]
    if task == "min_value":
        return [min(xs)]
    if task == "distinct_count":
        return [len(set(xs))]
    if task == "range_span":
        return [max(xs) - min(xs)]
    if task == "count_above":
        return [sum(1 for x in xs if x > param)]
    if task == "count_below":
        return [sum(1 for x in xs if x < param)]
    if task == "sum_above":
        return [sum(x for x in xs if x > param)]
    raise ValueError(f"unknown mock task {task!r}")


@dataclass(frozen=True)
class MockSpec:
    behavior: str = "faithful_sorter"
    task: str = "sort_asc"
    size_base: int = 0
    value_lo: int = 0
    value_hi: int = 99
    template: str = "Sort these numbers in ascending order and output them separated by spaces: {values}"
    salt: str = "seed0"
    var_name: str = "values"
    style: int = 0
    key_sep: str = "|"
    param: int = 0
    note: str = ""

    def __post_init__(self) -> None:
        if self.behavior not in MOCK_BEHAVIORS:
            raise ValueError(f"unknown mock behavior {self.behavior!r}")
        if self.task not in TASKS:
            raise ValueError(f"unknown mock task {self.task!r}")
        if "{values}" not in self.template:
            raise ValueError("template must contain a {values} slot")


ANSWER_NAMES = ("answer", "result", "expected", "target")


def _generate_body(spec: MockSpec) -> list[str]:
    """Body variants for the generator method. All styles draw the identical
    RNG stream (randint(lo, hi) == lo + randrange(hi - lo + 1)), so the style
    is purely textual; it exists to make code-view embeddings honest about
    how different two candidates are."""
    v = spec.var_name
    expr = TASKS[spec.task][1].format(v=v, p=spec.param)
    sep = spec.key_sep
    key = f'f"{spec.salt}{sep}{{seed}}{sep}{{difficulty}}"'
    lo, hi, base = spec.value_lo, spec.value_hi, spec.size_base
    ans = ANSWER_NAMES[spec.style % len(ANSWER_NAMES)]
    style = spec.style % 6
    if style == 0:
        return [
            f"        rng = random.Random({key})",
            f"        {v} = [rng.randint({lo}, {hi}) for _ in range({base} + difficulty)]",
            f"        {ans} = {expr}",
            f"        return {v}, {ans}",
        ]
    if style == 1:
        return [
            f"        rng = random.Random({key})",
            f"        {v} = []",
            f"        for _ in range({base} + difficulty):",
            f"            {v}.append(rng.randint({lo}, {hi}))",
            f"        return {v}, {expr}",
        ]
    if style == 2:
        return [
            f"        rng = random.Random({key})",
            f"        width = {hi} - {lo} + 1",
            f"        {v} = [{lo} + rng.randrange(width) for _ in range({base} + difficulty)]",
            f"        {ans} = {expr}",
            f"        return {v}, {ans}",
        ]
    if style == 3:
        return [
            f"        key = {key}",
            "        rng = random.Random(key)",
            f"        count = {base} + difficulty",
            f"        {v} = [rng.randint({lo}, {hi}) for _ in range(count)]",
            f"        return {v}, {expr}",
        ]
    if style == 4:
        return [
            f"        rng = random.Random({key})",
            f"        remaining = {base} + difficulty",
            f"        {v} = []",
            "        while remaining > 0:",
            f"            {v}.append(rng.randint({lo}, {hi}))",
            "            remaining -= 1",
            f"        {ans} = {expr}",
            f"        return {v}, {ans}",
        ]
    return [
        f"        rng = random.Random({key})",
        f"        low, high = {lo}, {hi}",
        f"        {v} = [rng.randint(low, high) for _ in range({base} + difficulty)]",
        f"        return {v}, {expr}",
    ]


def render_mock_source(spec: MockSpec) -> str:
    """Synthesize plausible environment source for a mock.

    The text is what embeddings, import scans, and reviewers see; the mock
    handle executes the equivalent logic in-process."""
    class_name = "".join(part.capitalize() for part in spec.task.split("_")) + "Task"
    v = spec.var_name
    lines = [
        "import random",
        "",
        "",
        f"class {class_name}:",
        f"    prompt_template = {spec.template!r}",
        "",
        "    def generate(self, seed, difficulty):",
        *_generate_body(spec),
        "",
        f"    def render(self, {v}):",
        f"        return self.prompt_template.format(values=\" \".join(map(str, {v})))",
        "",
        "    def process(self, response):",
        "        try:",
        "            return [int(token) for token in response.split()]",
        "        except ValueError:",
        "            return None",
        "",
        f"    def score(self, parsed, {v}, answer):",
        "        return float(parsed == answer)",
    ]
    if spec.note:
        lines += ["", f"# audit-note: {spec.note}"]
    return "\n".join(lines) + "\n"


def mock_env(behavior: str | MockSpec, env_id: str | None = None, origin: str = "mock",
             created_step: int = 0, **overrides) -> EnvArtifact:
    """Build a self-contained mock artifact; the spec travels in entry_command."""
    if isinstance(behavior, MockSpec):
        spec = behavior
    else:
        name = "faithful_sorter" if behavior == "faithful" else behavior
        spec = MockSpec(behavior=name, **overrides)
    if env_id is None:
        env_id = f"mock-{spec.behavior}"
    return EnvArtifact(
        env_id=env_id,
        source=render_mock_source(spec),
        entry_command="mock:" + canonical_json(asdict(spec)),
        prompt_template=spec.template,
        origin=origin,
        created_step=created_step,
    )


def parse_mock_spec(artifact: EnvArtifact) -> MockSpec:
    if not artifact.is_mock:
        raise ValueError(f"{artifact.env_id} is not a mock artifact")
    return MockSpec(**json.loads(artifact.entry_command[len("mock:"):]))


class MockHandle(EnvHandle):
    def __init__(self, spec: MockSpec, limits: RunnerLimits):
        super().__init__()
        self._spec = spec
        self._limits = limits
        self._generate_calls = 0

    # -- instance machinery -------------------------------------------------

    def _values(self, seed: int, difficulty: int) -> list[int]:
        spec = self._spec
        if spec.behavior == "constant_output":
            rng = random.Random(f"{spec.salt}{spec.key_sep}constant")
            size = spec.size_base + 2
        else:
            rng = random.Random(f"{spec.salt}{spec.key_sep}{seed}{spec.key_sep}{difficulty}")
            size = spec.size_base + difficulty
        xs = [rng.randint(spec.value_lo, spec.value_hi) for _ in range(max(1, size))]
        if spec.behavior == "nondeterministic":
            self._generate_calls += 1
            xs[0] = xs[0] + self._generate_calls
        return xs

    def _prompt(self, xs: list[int]) -> str:
        prompt = self._spec.template.format(values=" ".join(map(str, xs)))
        if self._spec.behavior == "leaky_parser":
            prompt += " [ref=" + canonical_json(_apply_task(self._spec.task, xs, self._spec.param)) + "]"
        return prompt

    def _score(self, xs: list[int], answer: list[int], response: str) -> dict:
        if self._spec.behavior == "crash_on_score" and response.strip():
            self.closed = True
            raise EnvCrash("mock scorer crashed")
        try:
            parsed = [int(token) for token in response.split()]
        except ValueError:
            parsed = None
        if parsed is None:
            return {"score": 0.0, "parsed": None, "parse_failed": True}
        if self._spec.behavior == "permissive_scorer":
            value = float(len(parsed) == len(answer))
        else:
            value = float(parsed == answer)
        return {"score": value, "parsed": parsed, "parse_failed": False}

    # -- protocol ------------------------------------------------------------

    def _exchange(self, op: str, correlation_id: int, payload: dict) -> dict:
        if self.closed:
            raise EnvCrash("mock handle is closed")
        out: dict = {"correlation_id": correlation_id, "ok": True}
        if op == "generate":
            xs = self._values(payload["seed"], payload["difficulty"])
            out["latent"] = canonical_json(xs)
            out["reference"] = canonical_json(_apply_task(self._spec.task, xs, self._spec.param))
        elif op == "render":
            xs = json.loads(payload["latent"])
            out["prompt"] = self._prompt(xs)
        elif op == "score":
            xs = json.loads(payload["latent"])
            answer = json.loads(payload["reference"])
            out.update(self._score(xs, answer, payload["response"]))
        elif op == "render_answer":
            answer = json.loads(payload["reference"])
            out["response_text"] = " ".join(map(str, answer))
        elif op == "conformance":
            out["class_name"] = "MockTask"
            out["entry_points"] = ["generate", "render", "process", "score", "render_answer"]
            out["prompt_template"] = self._spec.template
        elif op == "shutdown":
            self.closed = True
        else:
            raise ProtocolError(f"mock does not implement op {op!r}")
        return out

    def close(self) -> None:
        self.closed = True


def launch_mock(artifact: EnvArtifact, limits: RunnerLimits) -> MockHandle:
    spec = parse_mock_spec(artifact)
    if spec.behavior == "launch_fail":
        raise LaunchFailure("mock program exits immediately")
    return MockHandle(spec, limits)
