"""Checkpoint storage: round trips, corruption, version monotonicity."""

import json

import pytest

from coscribe.errors import DocumentNotFoundError, SnapshotCorruptError
from coscribe.store import DocumentStore
from coscribe.sim.harness import SimHarness

RULES = [
    {"template": "summary", "response": "The agent helps."},
    {"template": "task_title", "response": "Do The Thing"},
    {"template": "assignee_select", "response_json": {"agent_id": "a1", "confidence_rate": 0.9}},
    {"template": "agent_init", "response": "A reply."},
    {"template": "segment_select", "response": "[]"},
]


def test_save_then_load_roundtrips_bytes(tmp_path):
    store = DocumentStore(tmp_path)
    record = {"format": "coscribe-record", "snapshot": {"x": 1}, "metadata": {"doc_id": "d1"}}
    v1 = store.save("d1", record)
    assert v1 == 1
    loaded = store.load("d1")
    assert loaded["snapshot"] == {"x": 1}
    assert loaded["checkpoint_version"] == 1


def test_versions_strictly_increase_and_newest_wins(tmp_path):
    store = DocumentStore(tmp_path)
    for i in range(3):
        v = store.save("d1", {"n": i})
        assert v == i + 1
    assert store.load("d1")["n"] == 2
    assert store.latest_version("d1") == 3


def test_unknown_id_and_corrupt_blob(tmp_path):
    store = DocumentStore(tmp_path)
    with pytest.raises(DocumentNotFoundError):
        store.load("missing")
    store.save("d1", {"ok": True})
    path = tmp_path / "d1" / "checkpoint-000001.json"
    path.write_text(path.read_text()[:10])  # truncate
    with pytest.raises(SnapshotCorruptError):
        store.load("d1")


def test_old_checkpoints_pruned(tmp_path):
    store = DocumentStore(tmp_path)
    for i in range(15):
        store.save("d1", {"n": i})
    files = sorted(p.name for p in (tmp_path / "d1").iterdir() if p.name.startswith("checkpoint"))
    assert len(files) == 10
    assert files[-1] == "checkpoint-000015.json"


def test_run_log_append_only(tmp_path):
    store = DocumentStore(tmp_path)
    store.append_run_log("d1", {"run_id": "run1"})
    store.append_run_log("d1", {"run_id": "run2"})
    assert [r["run_id"] for r in store.read_run_logs("d1")] == ["run1", "run2"]
    assert store.read_run_logs("other") == []


# ---------------------------------------------------------------------------
# Full service round trip
# ---------------------------------------------------------------------------


def populated_harness(tmp_path):
    h = SimHarness(mock_rules=list(RULES), data_dir=str(tmp_path / "data"), seed=7)
    svc = h.create_document(goal_text="an essay")
    alice = h.client(svc, "Alice")
    alice.insert(0, "hello world, this needs work")
    svc.create_agent("alice", "Reviewer", role="reviews")
    svc.create_agent("alice", "Brainstormer", role="ideates")
    svc.instantiate_preset("alice", "english_teacher")
    svc.create_task("alice", "tighten the prose")
    svc.create_task("alice", "recap on save", assignee="a1", interaction="autonomous", trigger="on_save")
    for i in range(5):
        alice.comment(f"note {i}", select=(i, i + 2))
    result = alice.comment("@aiauthor improve this", select=(12, 16))
    thread = result["thread"]["thread_id"]
    reply = svc.comments.threads[thread].messages[-1]
    alice.consume(thread, reply.message_id, "append")
    return h, svc, alice


def test_full_state_roundtrip_deep_equal(tmp_path):
    h, svc, alice = populated_harness(tmp_path)
    svc.save("alice")  # exercises the on_save path too
    # Final-state checkpoint: what is on disk must reproduce exactly this.
    record_before = svc.to_record()
    h.hub.store.save(svc.doc_id, record_before)

    h2 = SimHarness(mock_rules=list(RULES), data_dir=str(tmp_path / "data"), seed=7)
    loaded = h2.hub.resolve(svc.doc_id)
    assert loaded.to_record() == record_before
    assert loaded.doc.text == svc.doc.text
    assert loaded.registry.default_agent().handle == "aiAuthor"
    assert {t.title for t in loaded.tasks.all()} >= {"Extend", "Summarize", "Translate"}
    assert len(loaded.comments.threads) == len(svc.comments.threads)


def test_reload_continues_id_sequences_without_collisions(tmp_path):
    h, svc, alice = populated_harness(tmp_path)
    svc.save("alice")
    old_threads = set(svc.comments.threads)

    h2 = SimHarness(mock_rules=list(RULES), data_dir=str(tmp_path / "data"), seed=7)
    loaded = h2.hub.resolve(svc.doc_id)
    bob = h2.client(loaded, "Bob")
    result = bob.comment("fresh thread", select=(0, 4))
    assert result["thread"]["thread_id"] not in old_threads


def test_save_emits_on_save_and_bumps_save_counter(tmp_path):
    h, svc, alice = populated_harness(tmp_path)
    before = svc.doc.save_counter
    v1 = svc.save("alice")
    v2 = svc.save("alice")
    assert svc.doc.save_counter == before + 2
    assert v2 == v1 + 1
    assert [k for _, k in svc.triggers.fired_log if k == "on_save"] == ["on_save", "on_save"]


def test_by_id_endpoints_survive_restart(tmp_path):
    h, svc, alice = populated_harness(tmp_path)
    agent_id = next(a.agent_id for a in svc.registry.all() if not a.is_default)
    task = svc.create_task("alice", "post-restart probe", assignee=agent_id)
    thread_id = next(iter(svc.comments.threads))
    svc.save("alice")

    h2 = SimHarness(mock_rules=list(RULES), data_dir=str(tmp_path / "data"), seed=7)
    found_svc, found_agent = h2.hub.find_agent(agent_id)
    assert found_agent.agent_id == agent_id
    _, found_task = h2.hub.find_task(task["task_id"])
    assert found_task.description == "post-restart probe"
    _, found_thread = h2.hub.find_thread(thread_id)
    assert found_thread.thread_id == thread_id


def test_checkpoint_cadence_on_activity(tmp_path):
    h = SimHarness(
        mock_rules=list(RULES), data_dir=str(tmp_path / "data"), seed=1,
    )
    svc = h.create_document()
    store = h.hub.store
    alice = h.client(svc, "Alice")
    v0 = store.latest_version(svc.doc_id)
    alice.insert(0, "a")
    assert store.latest_version(svc.doc_id) == v0  # not yet due
    h.advance_to(61.0)
    alice.insert(1, "b")  # 60s of activity elapsed: checkpoint
    assert store.latest_version(svc.doc_id) == v0 + 1
