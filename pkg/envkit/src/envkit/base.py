"""Base class and helpers injected into environment sources.

Environment files never import this module: the server executes them in a
namespace where ``VerifiableTask``, ``parse_int_list``, and ``parse_int`` are
predefined, so sources stay clean under the sandbox import allowlist.

Contract for subclasses:
    generate(seed, difficulty) -> (latent, reference)   pure in (seed, difficulty)
    render(latent) -> prompt text
    process(response) -> parsed value, or None on parse failure
    score(parsed, latent, reference) -> float in [0, 1]
    render_answer(reference) -> correct response text (override for
        references that are not ints or flat int lists)
"""

from __future__ import annotations


def parse_int_list(text: str):
    """Whitespace-separated integers; None when empty or malformed."""
    tokens = text.split()
    if not tokens:
        return None
    try:
        return [int(token) for token in tokens]
    except ValueError:
        return None


def parse_int(text: str):
    """One integer token; None otherwise."""
    tokens = text.split()
    if len(tokens) != 1:
        return None
    try:
        return int(tokens[0])
    except ValueError:
        return None


class VerifiableTask:
    """A reusable verifiable environment: instance sampler, prompt renderer,
    response parser, and frozen scorer."""

    prompt_template: str = ""
    parameter: dict = {}

    def generate(self, seed: int, difficulty: int):
        raise NotImplementedError

    def render(self, latent) -> str:
        raise NotImplementedError

    def process(self, response: str):
        return parse_int_list(response)

    def score(self, parsed, latent, reference) -> float:
        raise NotImplementedError

    def render_answer(self, reference) -> str:
        if isinstance(reference, list):
            return " ".join(str(x) for x in reference)
        return str(reference)

    def entry_points(self) -> list[str]:
        names = []
        for name in ("generate", "render", "process", "score", "render_answer"):
            method = getattr(self, name, None)
            if callable(method):
                names.append(name)
        return names
