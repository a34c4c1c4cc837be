"""Digest-chained ledger: append, verify, tamper detection."""

import json

import pytest

from envforge.errors import CorruptLedger
from envforge.ledger import GENESIS_DIGEST, RunLedger, verify_file


def test_events_strictly_ordered_and_chained(tmp_path):
    path = tmp_path / "ledger.jsonl"
    ledger = RunLedger(path)
    first = ledger.append("run_config", step=0, payload={"a": 1})
    second = ledger.append("pool_admit", step=1, env_id="e1")
    ledger.close()
    assert first["seq"] == 0 and second["seq"] == 1
    assert first["digest"] != second["digest"]
    result = verify_file(path)
    assert result.ok and result.events == 2
    assert result.final_digest == ledger.final_digest


def test_untouched_ledger_verifies(tmp_path):
    path = tmp_path / "ledger.jsonl"
    ledger = RunLedger(path)
    for i in range(20):
        ledger.append("candidate_decision", step=i, env_id=f"cand-{i}",
                      payload={"r_gen": i * 0.5})
    ledger.close()
    assert verify_file(path).ok


def test_single_flipped_byte_is_detected(tmp_path):
    path = tmp_path / "ledger.jsonl"
    ledger = RunLedger(path)
    for i in range(5):
        ledger.append("step_report", step=i, payload={"value": i})
    ledger.close()
    lines = path.read_text().splitlines()
    tampered = lines[2].replace('"value": 2', '"value": 7')
    assert tampered != lines[2]
    path.write_text("\n".join(lines[:2] + [tampered] + lines[3:]) + "\n")
    result = verify_file(path)
    assert not result.ok
    assert result.first_bad_seq == 2


def test_truncated_tail_still_verifies_prefix(tmp_path):
    # Append-only: removing the tail leaves a valid shorter chain.
    path = tmp_path / "ledger.jsonl"
    ledger = RunLedger(path)
    for i in range(4):
        ledger.append("e", step=i)
    ledger.close()
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:2]) + "\n")
    result = verify_file(path)
    assert result.ok and result.events == 2


def test_unparseable_ledger_raises(tmp_path):
    path = tmp_path / "ledger.jsonl"
    path.write_text("{not json}\n")
    with pytest.raises(CorruptLedger):
        verify_file(path)
    with pytest.raises(CorruptLedger):
        verify_file(tmp_path / "missing.jsonl")


def test_wall_time_excluded_from_digest(tmp_path):
    a = RunLedger()
    b = RunLedger()
    a.append("x", step=1, payload={"v": 2})
    b.append("x", step=1, payload={"v": 2})
    assert a.final_digest == b.final_digest
    assert a.events[0]["wall_time"] != "" # present for humans


def test_in_memory_ledger_needs_no_file():
    ledger = RunLedger()
    ledger.append("x")
    assert ledger.final_digest != GENESIS_DIGEST
