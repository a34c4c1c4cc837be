"""Pluggable text embeddings for the novelty module.

The reference provider is a deterministic, dependency-free feature hasher
(character trigrams + token unigrams into a fixed-width non-negative vector,
L2-normalized), so cosines land in [0, 1] and identical text embeds
identically across runs and processes. The external provider posts to a
simple embedding endpoint: request {"texts": [...]}, response
{"vectors": [[...]]}.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

REFERENCE_DIMENSION = 256


class EmbeddingProvider:
    name: str = "abstract"
    dimension: int = 0
    kind: str = "abstract"

    def embed_text(self, text: str) -> np.ndarray:
        raise NotImplementedError

    def embed_many(self, texts: list[str]) -> list[np.ndarray]:
        return [self.embed_text(t) for t in texts]


def _bucket(feature: str, dimension: int) -> int:
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") % dimension


class FeatureHashingEmbedding(EmbeddingProvider):
    kind = "reference_hashing"

    def __init__(self, dimension: int = REFERENCE_DIMENSION):
        self.dimension = dimension
        self.name = f"feature-hash-{dimension}"

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dimension, dtype=np.float64)
        for token in text.split():
            vec[_bucket("t:" + token, self.dimension)] += 1.0
        padded = f"  {text}  "
        for i in range(len(padded) - 2):
            vec[_bucket("g:" + padded[i:i + 3], self.dimension)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ValueError("cannot embed empty text")
        return vec / norm


class EndpointEmbedding(EmbeddingProvider):
    kind = "external_service"

    def __init__(self, url: str, dimension: int, name: str = "external"):
        self.url = url
        self.dimension = dimension
        self.name = name

    def embed_many(self, texts: list[str]) -> list[np.ndarray]:
        import requests

        resp = requests.post(self.url, json={"texts": texts}, timeout=30)
        resp.raise_for_status()
        vectors = resp.json()["vectors"]
        out = []
        for row in vectors:
            vec = np.asarray(row, dtype=np.float64)
            norm = float(np.linalg.norm(vec))
            if norm == 0.0:
                raise ValueError("endpoint returned a zero vector")
            out.append(vec / norm)
        return out

    def embed_text(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]


_TRIPLE_QUOTED_RE = re.compile(r'("""|\'\'\')(?:.|\n)*?\1')
_COMMENT_RE = re.compile(r"#[^\n]*")


def clean_code(body: str) -> str:
    """Strip comments, documentation strings, and blank lines; collapse
    whitespace runs so cosmetic edits do not move the code embedding."""
    body = _TRIPLE_QUOTED_RE.sub(" ", body)
    body = _COMMENT_RE.sub(" ", body)
    lines = [line.strip() for line in body.splitlines() if line.strip()]
    return re.sub(r"\s+", " ", " ".join(lines)).strip()


_GENERATE_DEF_RE = re.compile(r"^([ \t]*)def _?generate\b.*$", re.MULTILINE)


def extract_generator_body(source: str) -> str | None:
    """Locate the generator method body textually (language-light on purpose:
    candidates may be slightly malformed and still deserve a code view)."""
    match = _GENERATE_DEF_RE.search(source)
    if match is None:
        return None
    indent = len(match.group(1))
    lines = source[match.end():].splitlines()
    body: list[str] = []
    for line in lines:
        if line.strip():
            current = len(line) - len(line.lstrip())
            if current <= indent:
                break
        body.append(line)
    text = "\n".join(body).strip("\n")
    return text if text.strip() else None
