"""External-service clients against a stubbed transport."""

import json

import numpy as np
import pytest

from envforge.artifacts import InstanceRecord
from envforge.clients import (
    EndpointGenerator,
    EndpointPolicyClient,
    EndpointReviewer,
    EndpointSolver,
)
from envforge.embedding import EndpointEmbedding
from envforge.errors import ReviewerUnavailable
from envforge.review import ReviewPacket


class FakeResponse:
    def __init__(self, payload, status=200):
        self.payload = payload
        self.status = status

    def raise_for_status(self):
        if self.status != 200:
            raise RuntimeError(f"http {self.status}")

    def json(self):
        return self.payload


def test_endpoint_embedding_contract(monkeypatch):
    captured = {}

    def fake_post(url, json=None, timeout=None):
        captured["url"] = url
        captured["body"] = json
        return FakeResponse({"vectors": [[3.0, 4.0], [0.0, 2.0]]})

    import requests

    monkeypatch.setattr(requests, "post", fake_post)
    provider = EndpointEmbedding("http://embed", dimension=2, name="stub")
    vectors = provider.embed_many(["alpha", "beta"])
    assert captured["url"] == "http://embed"
    assert captured["body"] == {"texts": ["alpha", "beta"]}
    assert np.allclose(vectors[0], [0.6, 0.8])  # normalized server output
    assert np.allclose(vectors[1], [0.0, 1.0])


def test_endpoint_policy_roles(monkeypatch):
    def fake_post(url, json=None, timeout=None):
        return FakeResponse({"text": f"echo:{json['role']}"})

    import requests

    monkeypatch.setattr(requests, "post", fake_post)
    transport = EndpointPolicyClient("http://policy")
    solver = EndpointSolver(transport)
    assert solver.respond("prompt") == "echo:solver"
    assert solver.calls == 1


def test_endpoint_generator_extracts_fenced_source(monkeypatch):
    reply = "Here you go:\n```python\nclass T(VerifiableTask):\n    prompt_template = \"Do: {values}\"\n```\n"

    def fake_post(url, json=None, timeout=None):
        return FakeResponse({"text": reply})

    import requests

    monkeypatch.setattr(requests, "post", fake_post)
    generator = EndpointGenerator(EndpointPolicyClient("http://policy"),
                                  entry_command="serve {source_file}")
    drafts = generator.propose([], 2)
    assert len(drafts) == 2
    assert drafts[0].source.startswith("class T")
    assert drafts[0].prompt_template == "Do: {values}"
    assert drafts[0].entry_command == "serve {source_file}"


def test_endpoint_reviewer_maps_transport_failure_to_unavailable(monkeypatch):
    def fake_post(url, json=None, timeout=None):
        raise ConnectionError("down")

    import requests

    monkeypatch.setattr(requests, "post", fake_post)
    reviewer = EndpointReviewer(EndpointPolicyClient("http://policy"))
    record = InstanceRecord(seed=0, difficulty=1, latent="[1]", reference="[1]", prompt="p")
    packet = ReviewPacket(source="s", instances=[record], probe_summary=[], prompt_rendered="p")
    with pytest.raises(ReviewerUnavailable):
        reviewer.review(packet, "instruction")
