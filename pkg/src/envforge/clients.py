"""Policy-client boundary: generator, solver, and reviewer roles.

One external policy plays every role; this module defines the call boundary
plus deterministic scripted references used by tests and scripted runs. The
endpoint clients speak a minimal text-completion contract:
POST url {"role": ..., "prompt": ...} -> {"text": ...}.
"""

from __future__ import annotations

import random
import re
from dataclasses import asdict, dataclass, replace

from .artifacts import EnvArtifact
from .calibration import ResponseOracle
from .errors import ReviewerUnavailable
from .mocks import PARAMETRIC_TASKS, TASKS, MockSpec, parse_mock_spec, render_mock_source
from .protocol import canonical_json
from .review import ReviewPacket


@dataclass(frozen=True)
class CandidateDraft:
    """What the generator role hands back per candidate."""

    source: str
    entry_command: str
    prompt_template: str


# ---------------------------------------------------------------------------
# Scripted generator: mutates a few-shot context artifact's parameters.
# ---------------------------------------------------------------------------

TEMPLATE_BANK: dict[str, tuple[str, ...]] = {
    "sort_asc": (
        "Sort these numbers in ascending order and output them separated by spaces: {values}",
        "Arrange the following values from smallest to largest: {values}",
        "Output the given integers sorted in ascending order: {values}",
        "Rewrite the list so it climbs from lowest to highest: {values}",
    ),
    "sort_desc": (
        "Sort these numbers in descending order and output them separated by spaces: {values}",
        "Arrange the following values from largest to smallest: {values}",
        "Rewrite the list so it falls from highest to lowest: {values}",
    ),
    "total_sum": (
        "Add up all of these numbers and output the total sum: {values}",
        "Compute the sum of the following values and output it: {values}",
        "What do these integers add up to? {values}",
    ),
    "max_value": (
        "Output the largest value in this list: {values}",
        "Find the max of the following numbers and output it: {values}",
        "Which entry is biggest? Output it alone: {values}",
    ),
    "min_value": (
        "Output the smallest value in this list: {values}",
        "Find the min of the following numbers and output it: {values}",
        "Which entry is tiniest? Output it alone: {values}",
    ),
    "distinct_count": (
        "Count the distinct values in this list and output the count: {values}",
        "How many distinct numbers appear here? Output the count: {values}",
        "Ignoring repeats, how many different integers are present? {values}",
    ),
    "range_span": (
        "Output the spread between the largest and smallest value: {values}",
        "Compute max minus min for these numbers and output it: {values}",
        "How wide is the gap from the lowest entry to the highest? {values}",
    ),
    "count_above": (
        "Count how many values exceed {param} and output that count: {values}",
        "How many of these numbers are strictly greater than {param}? {values}",
        "Tally the entries above the cutoff {param} and output the tally: {values}",
    ),
    "count_below": (
        "Count how many values fall under {param} and output that count: {values}",
        "How many of these numbers are strictly less than {param}? {values}",
        "Tally the entries beneath the cutoff {param} and output the tally: {values}",
    ),
    "sum_above": (
        "Add up every value exceeding {param} and output the total: {values}",
        "Compute the sum of the numbers strictly greater than {param}: {values}",
        "Total only the entries above the cutoff {param}: {values}",
    ),
}

STORY_PREFIXES = (
    "",
    "A sensor attached to the {scenario} recorded these readings.",
    "You are auditing measurements from the {scenario}.",
    "The following values were sampled from the {scenario} log.",
    "Consider this sequence of integers taken from the {scenario}.",
    "The {scenario} board holds these numbers.",
    "A scanner in the {scenario} produced this batch.",
    "These scores came from the {scenario} round.",
    "An experiment on the {scenario} logged the following counts.",
    "The {scenario} route reported these weights.",
)

SCENARIO_ADJECTIVES = (
    "crimson", "quiet", "northern", "ancient", "brisk", "copper", "dusty",
    "emerald", "frosty", "gilded", "hollow", "ivory", "jade", "kindled",
    "lunar", "mossy", "neon", "opal", "pale", "rust",
)

SCENARIO_NOUNS = (
    "ledger", "harbor", "orchard", "workshop", "archive", "garden", "depot",
    "observatory", "foundry", "library", "market", "quarry", "reservoir",
    "station", "terrace", "vault", "mill", "causeway", "greenhouse", "atrium",
)

STORY_SUFFIXES = (
    "",
    "Answer with integers separated by single spaces.",
    "Reply on one line.",
    "Values lie between {lo} and {hi}.",
    "There are up to {n} numbers.",
    "File the answer under reference {tag}.",
    "Batch id {tag}; give the answer only.",
    "Ticket {tag} expects just the numbers.",
)

VAR_NAMES = ("values", "items", "nums", "data", "entries", "readings", "samples", "points")

KEY_SEPS = ("|", ":", "-", "/")

# Labeled bugs the mutation generator can inject; each maps onto the
# validator's fixture taxonomy except inverted_objective, which survives all
# five layers and exists for the semantic reviewer to catch.
BUG_KINDS = (
    "launch_fail",
    "nondeterministic",
    "constant_output",
    "permissive_scorer",
    "leaky_parser",
    "crash_on_score",
    "inverted_objective",
)

_INVERTED = {
    "sort_asc": "sort_desc",
    "sort_desc": "sort_asc",
    "max_value": "min_value",
    "min_value": "max_value",
    "total_sum": "distinct_count",
    "distinct_count": "total_sum",
    "range_span": "total_sum",
    "count_above": "count_below",
    "count_below": "count_above",
    "sum_above": "count_above",
}


def _references_vary(spec: MockSpec, seeds: int = 5, difficulties: tuple[int, ...] = (1, 2, 3)) -> bool:
    """Mutation must preserve validity: at every probed difficulty the spec's
    references differ across seeds (otherwise the candidate would stall at the
    non-triviality layer through no injected fault)."""
    from .artifacts import DEFAULT_LIMITS
    from .mocks import MockHandle

    handle = MockHandle(replace(spec, behavior="faithful_sorter"), DEFAULT_LIMITS)
    for difficulty in difficulties:
        refs = set()
        for seed in range(seeds):
            response = handle._exchange("generate", 0, {"seed": seed, "difficulty": difficulty})
            refs.add(response["reference"])
        if len(refs) < 2:
            return False
    return True


class ScriptedGenerator:
    """Deterministic stand-in for the generator role."""

    def __init__(self, rng: random.Random, bug_rate: float = 0.0,
                 bug_kinds: tuple[str, ...] = BUG_KINDS):
        self.rng = rng
        self.bug_rate = bug_rate
        self.bug_kinds = bug_kinds

    def _draw_spec(self) -> MockSpec:
        rng = self.rng
        task = rng.choice(sorted(TASKS))
        size_base = rng.randint(0, 3)
        value_lo = rng.choice((0, 1, 5, 10))
        value_hi = rng.choice((49, 99, 200, 500))
        param = rng.randint(value_lo + 1, value_hi - 1) if task in PARAMETRIC_TASKS else 0
        scenario = f"{rng.choice(SCENARIO_ADJECTIVES)} {rng.choice(SCENARIO_NOUNS)}"
        prefix = rng.choice(STORY_PREFIXES).format(scenario=scenario)
        tag = "".join(rng.choice("ABCDEFGHJKLMNPQRSTUVWXYZ") for _ in range(2)) \
            + "-" + str(rng.randrange(100, 999))
        suffix = rng.choice(STORY_SUFFIXES).format(lo=value_lo, hi=value_hi,
                                                   n=size_base + 6, tag=tag)
        core = rng.choice(TEMPLATE_BANK[task]).replace("{param}", str(param))
        template = " ".join(part for part in (prefix, core, suffix) if part)
        return MockSpec(
            behavior="faithful_sorter",
            task=task,
            size_base=size_base,
            value_lo=value_lo,
            value_hi=value_hi,
            template=template,
            salt=f"s{rng.randrange(1_000_000):06d}",
            var_name=rng.choice(VAR_NAMES),
            style=rng.randrange(24),
            key_sep=rng.choice(KEY_SEPS),
            param=param,
        )

    def _mutate(self, base: MockSpec) -> CandidateDraft:
        rng = self.rng
        spec = None
        for _ in range(12):
            candidate = self._draw_spec()
            inverted = replace(candidate, task=_INVERTED.get(candidate.task, "sort_desc"))
            if _references_vary(candidate) and _references_vary(inverted):
                spec = candidate
                break
        if spec is None:
            spec = replace(self._draw_spec(), task="sort_asc")
        task = spec.task
        if rng.random() < self.bug_rate:
            kind = rng.choice(self.bug_kinds)
            if kind == "inverted_objective":
                # Template advertises one objective, the code computes another.
                spec = replace(spec, task=_INVERTED.get(task, "sort_desc"), note=kind)
            else:
                spec = replace(spec, behavior=kind, note=kind)
        return CandidateDraft(
            source=render_mock_source(spec),
            entry_command="mock:" + canonical_json(asdict(spec)),
            prompt_template=spec.template,
        )

    def propose(self, context: list[EnvArtifact], n: int) -> list[CandidateDraft]:
        base = None
        for artifact in context:
            if artifact.is_mock:
                base = parse_mock_spec(artifact)
                break
        if base is None:
            base = MockSpec()
        return [self._mutate(base) for _ in range(n)]


class ScriptedSolver:
    """Succeeds with probability p by reading the harness-only oracle,
    otherwise answers a deliberate perturbation."""

    def __init__(self, p: float, rng: random.Random | None = None):
        if not 0.0 <= p <= 1.0:
            raise ValueError("p must be in [0, 1]")
        self.p = p
        self.rng = rng or random.Random(0)
        self.calls = 0

    def respond(self, prompt: str, oracle: ResponseOracle | None = None) -> str:
        self.calls += 1
        draw = self.rng.random()
        if oracle is None:
            return "0"
        if draw < self.p:
            return oracle.correct_response()
        return oracle.perturbed_response()


_AUDIT_NOTE_RE = re.compile(r"#\s*audit-note:\s*(\S+)")


class ScriptedReviewer:
    """Flags a bug iff the source carries injected-bug metadata."""

    def review(self, packet: ReviewPacket, instruction: str, call_index: int = 0) -> str:
        match = _AUDIT_NOTE_RE.search(packet.source)
        if match:
            return canonical_json({"has_bugs": True, "rationale": f"injected {match.group(1)}"})
        return canonical_json({"has_bugs": False, "rationale": "consistent"})


@dataclass
class PolicyClients:
    generator: object
    solver: object
    reviewer: object


def scripted_clients(run_seed: int, bug_rate: float, solver_p: float,
                     bug_kinds: tuple[str, ...] = BUG_KINDS) -> PolicyClients:
    return PolicyClients(
        generator=ScriptedGenerator(random.Random(f"{run_seed}|generator"), bug_rate, bug_kinds),
        solver=ScriptedSolver(solver_p, random.Random(f"{run_seed}|solver")),
        reviewer=ScriptedReviewer(),
    )


# ---------------------------------------------------------------------------
# External endpoint clients.
# ---------------------------------------------------------------------------

_FENCED_RE = re.compile(r"```(?:python)?\n(.*?)```", re.DOTALL)
_TEMPLATE_RE = re.compile(
    r"prompt_template\s*=\s*(?:\(\s*)?(?:r)?(\"\"\"|'''|\"|')(.*?)\1", re.DOTALL
)


def extract_code_block(text: str) -> str | None:
    """Longest fenced code block, the convention for endpoint generator output."""
    blocks = _FENCED_RE.findall(text)
    if not blocks:
        return None
    return max(blocks, key=len)


def extract_prompt_template(source: str) -> str:
    match = _TEMPLATE_RE.search(source)
    return match.group(2) if match else ""


class EndpointPolicyClient:
    """Shared transport for all three roles against a text-completion endpoint."""

    def __init__(self, url: str, timeout: float = 60.0):
        self.url = url
        self.timeout = timeout

    def complete(self, role: str, prompt: str) -> str:
        import requests

        resp = requests.post(self.url, json={"role": role, "prompt": prompt},
                             timeout=self.timeout)
        resp.raise_for_status()
        return resp.json()["text"]


class EndpointGenerator:
    def __init__(self, client: EndpointPolicyClient, entry_command: str):
        self.client = client
        self.entry_command = entry_command

    def propose(self, context: list[EnvArtifact], n: int) -> list[CandidateDraft]:
        shots = "\n\n".join(a.source for a in context)
        prompt = (
            "Write one new verifiable environment in the style of these examples. "
            "Reply with a single fenced python code block.\n\n" + shots
        )
        drafts = []
        for _ in range(n):
            text = self.client.complete("generator", prompt)
            source = extract_code_block(text) or ""
            drafts.append(CandidateDraft(
                source=source,
                entry_command=self.entry_command,
                prompt_template=extract_prompt_template(source),
            ))
        return drafts


class EndpointSolver:
    def __init__(self, client: EndpointPolicyClient):
        self.client = client
        self.calls = 0

    def respond(self, prompt: str, oracle: ResponseOracle | None = None) -> str:
        self.calls += 1
        return self.client.complete("solver", prompt)


class EndpointReviewer:
    def __init__(self, client: EndpointPolicyClient):
        self.client = client

    def review(self, packet: ReviewPacket, instruction: str, call_index: int = 0) -> str:
        prompt = (
            instruction
            + "\n\nSource:\n" + packet.source
            + "\n\nRendered prompt:\n" + packet.prompt_rendered
            + "\n\nInstances:\n"
            + "\n".join(f"latent={r.latent} reference={r.reference}" for r in packet.instances)
        )
        try:
            return self.client.complete("reviewer", prompt)
        except Exception as exc:
            raise ReviewerUnavailable(str(exc)) from exc
