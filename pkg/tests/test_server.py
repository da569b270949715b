"""REST and websocket protocol tests."""

import pytest
from fastapi.testclient import TestClient

from coscribe.clock import SystemClock
from coscribe.crdt import SequenceCrdt
from coscribe.gateway import Gateway, MockScript
from coscribe.server.app import build_app
from coscribe.service import Hub, InlineExecutor, ServiceConfig
from coscribe.store import DocumentStore

RULES = [
    {"template": "summary", "response": "The agent helps."},
    {"template": "task_title", "response": "Generated Title"},
    {"template": "assignee_select", "response_json": {"agent_id": "a1", "confidence_rate": 0.9}},
    {"template": "agent_init", "response": "Try rephrasing this."},
    {"template": "segment_select", "response": "[]"},
    {"template": "cv_suggestions", "response_json": ["Outlining", "Summaries", "Citations"]},
]

ADMIN = {"X-Admin-Token": "secret"}


@pytest.fixture
def api(tmp_path):
    hub = Hub(
        config=ServiceConfig(admin_token="secret"),
        clock=SystemClock(),
        gateway=Gateway(provider=MockScript(list(RULES)), model_id="mock"),
        store=DocumentStore(tmp_path / "data"),
        executor=InlineExecutor(),
    )
    app = build_app(hub=hub, tick_interval_s=3600)
    with TestClient(app) as client:
        yield client, hub


def make_doc(client, goal="an essay"):
    resp = client.post("/documents", json={"goal_text": goal}, headers=ADMIN)
    assert resp.status_code == 200
    return resp.json()


def join(client, ref, name):
    resp = client.post(f"/documents/{ref}/join", json={"user": name})
    assert resp.status_code == 200
    return resp.json()


# ---------------------------------------------------------------------------
# Documents, join codes, snapshots
# ---------------------------------------------------------------------------


def test_create_requires_admin_token(api):
    client, hub = api
    assert client.post("/documents", json={}).status_code == 422
    assert client.post("/documents", json={}, headers={"X-Admin-Token": "wrong"}).status_code == 422
    assert client.post("/documents", json={}, headers=ADMIN).status_code == 200


def test_join_by_code_returns_snapshot_and_presence(api):
    client, hub = api
    doc = make_doc(client)
    info = join(client, doc["join_code"], "Alice")
    assert info["doc"] == doc["doc"]
    assert info["user"] == {"id": "alice", "name": "Alice"}
    assert info["snapshot"]["text"] == ""
    assert [p["id"] for p in info["snapshot"]["presence"]] == ["alice"]
    agents = info["snapshot"]["agents"]
    assert [a["handle"] for a in agents] == ["aiAuthor"]

    second = join(client, doc["doc"], "Bob")  # by id works too
    assert [p["id"] for p in second["snapshot"]["presence"]] == ["alice", "bob"]


def test_malformed_join_code_rejected(api):
    client, hub = api
    resp = client.post("/documents/nope123/join", json={"user": "Alice"})
    assert resp.status_code == 404
    assert "invalid join code" in resp.json()["error"]


def test_rejoin_same_name_is_same_identity(api):
    client, hub = api
    doc = make_doc(client)
    a1 = join(client, doc["doc"], "Alice")
    a2 = join(client, doc["doc"], "Alice")
    assert a1["user"]["id"] == a2["user"]["id"]
    snap = client.get(f"/documents/{doc['doc']}/snapshot").json()
    assert [p["id"] for p in snap["presence"]] == ["alice"]


def test_save_persists_and_returns_version(api):
    client, hub = api
    doc = make_doc(client)
    join(client, doc["doc"], "Alice")
    resp = client.post(f"/documents/{doc['doc']}/save", json={"user": "alice"})
    assert resp.status_code == 200
    assert resp.json()["version"] >= 1
    assert hub.store.latest_version(doc["doc"]) == resp.json()["version"]


def test_list_documents_admin_only(api):
    client, hub = api
    make_doc(client)
    assert client.get("/documents").status_code == 422
    docs = client.get("/documents", headers=ADMIN).json()
    assert len(docs) == 1 and docs[0]["doc"] == "doc1"


# ---------------------------------------------------------------------------
# Websocket broadcast
# ---------------------------------------------------------------------------


def edit_frame(replica: SequenceCrdt, offset: int, text: str, seq: int) -> dict:
    ops = replica.local_insert(offset, text)
    return {
        "kind": "edit_update",
        "seq": seq,
        "payload": {"ops": [op.to_wire() for op in ops], "origin": replica.replica_id},
    }


def test_edit_broadcast_reaches_other_members_exactly_once(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    bob = join(client, doc, "Bob")
    carol = join(client, doc, "Carol")

    with client.websocket_connect(f"/documents/{doc}/ws?session={alice['session']}") as ws_a, \
         client.websocket_connect(f"/documents/{doc}/ws?session={bob['session']}") as ws_b, \
         client.websocket_connect(f"/documents/{doc}/ws?session={carol['session']}") as ws_c:
        replica = SequenceCrdt(alice["replica"])
        ws_a.send_json(edit_frame(replica, 0, "hello", 1))
        for ws, member in ((ws_b, "bob"), (ws_c, "carol")):
            msg = ws.receive_json()
            assert msg["kind"] == "edit_update"
            assert msg["doc"] == doc
            assert msg["sender"] == {"type": "user", "id": "alice"}
            assert isinstance(msg["seq"], int)
            assert len(msg["payload"]["ops"]) == 5
    assert hub.docs[doc].doc.text == "hello"


def test_out_of_order_seq_rejected_with_error_message(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    with client.websocket_connect(f"/documents/{doc}/ws?session={alice['session']}") as ws:
        replica = SequenceCrdt(alice["replica"])
        ws.send_json(edit_frame(replica, 0, "a", 5))
        ws.send_json(edit_frame(replica, 1, "b", 3))  # stale seq
        first = ws.receive_json()
        assert first["kind"] == "edit_update"  # own echo of seq 5
        second = ws.receive_json()
        assert second["kind"] == "error"
        assert "out of order" in second["payload"]["reason"]
    assert hub.docs[doc].doc.text == "a"


def test_typing_indicator_precedes_agent_reply_on_the_wire(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    svc = hub.docs[doc]
    with client.websocket_connect(f"/documents/{doc}/ws?session={alice['session']}") as ws:
        replica = SequenceCrdt(alice["replica"])
        ws.send_json(edit_frame(replica, 0, "rough text", 1))
        ws.receive_json()  # own edit echo
        client.post(
            f"/documents/{doc}/comments",
            json={"user": "alice", "body": "@aiauthor improve", "anchor": [0, 5]},
        )
        kinds = [ws.receive_json() for _ in range(3)]
        sequence = [(m["kind"], m["payload"].get("event")) for m in kinds]
        assert sequence[0] == ("comment_event", "message")
        assert sequence[1][0] == "agent_typing"
        assert sequence[1] == ("agent_typing", None)
        assert sequence[2] == ("comment_event", "agent_reply")
        assert kinds[1]["sender"] == {"type": "agent", "id": "aiAuthor"}
        assert kinds[1]["payload"]["thread"] == kinds[2]["payload"]["thread"]
        seqs = [m["seq"] for m in kinds]
        assert seqs == sorted(seqs)


def test_broadcast_to_empty_room_still_persists_state(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    # No websocket attached: REST-only member leaves, then state still moves.
    client.post(f"/documents/{doc}/leave", json={"session": alice["session"]})
    svc = hub.docs[doc]
    svc.create_agent("alice", "Quiet", role="works unseen")
    assert svc.registry.by_handle("quiet") is not None


def test_disconnect_removes_presence(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    bob = join(client, doc, "Bob")
    with client.websocket_connect(f"/documents/{doc}/ws?session={bob['session']}"):
        pass  # connect then drop
    snap = client.get(f"/documents/{doc}/snapshot").json()
    assert [p["id"] for p in snap["presence"]] == ["alice"]


# ---------------------------------------------------------------------------
# Agents, tasks, comments over REST
# ---------------------------------------------------------------------------


def test_agent_crud_and_suggest_and_history(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    join(client, doc, "Alice")
    created = client.post(
        f"/documents/{doc}/agents",
        json={"user": "alice", "name": "Brainstormer", "role": "Comes up with ideas"},
    ).json()
    assert created["handle"] == "brainstormer"

    preset = client.post(
        f"/documents/{doc}/agents", json={"user": "alice", "preset": "reviewer"}
    ).json()
    assert preset["handle"] == "reviewer"

    updated = client.put(
        f"/documents/{doc}/agents/{created['agent_id']}",
        json={"user": "bob", "role": "Generates bold ideas"},
    ).json()
    assert updated["role"] == "Generates bold ideas"
    assert updated["last_editor"] == "bob"

    sugg = client.post(
        f"/agents/{created['agent_id']}/suggest", json={"section": "expertise", "current": []}
    ).json()
    assert sugg["suggestions"] == ["Outlining", "Summaries", "Citations"]

    assert client.get(f"/agents/{created['agent_id']}/history").json() == []
    dup = client.post(f"/documents/{doc}/agents", json={"user": "bob", "name": "brainstormer"})
    assert dup.status_code == 409


def test_task_crud_run_and_shortcut_listing(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    join(client, doc, "Alice")
    with client.websocket_connect(f"/documents/{doc}/ws?session={join(client, doc, 'Bob')['session']}"):
        pass
    task = client.post(
        f"/documents/{doc}/tasks",
        json={"user": "alice", "description": "Fix grammar and typos", "shortcut": True},
    ).json()
    assert task["title"] == "Generated Title"
    assert task["assignee"] == "a1"

    shortcuts = client.get(f"/documents/{doc}/shortcuts").json()
    assert {"task_id": task["task_id"], "title": task["title"]} in shortcuts

    run = client.post(f"/tasks/{task['task_id']}/run", json={}).json()
    assert run["task_id"] == task["task_id"]
    runs = client.get(f"/tasks/{task['task_id']}/runs").json()
    assert [r["run_id"] for r in runs] == [run["run_id"]]

    updated = client.put(
        f"/documents/{doc}/tasks/{task['task_id']}",
        json={"user": "alice", "description": "Fix spelling everywhere"},
    ).json()
    assert updated["description"] == "Fix spelling everywhere"

    gone = client.delete(f"/documents/{doc}/tasks/{task['task_id']}?user=alice")
    assert gone.status_code == 200
    assert client.post(f"/tasks/{task['task_id']}/run", json={}).status_code == 404


def test_comment_flow_over_rest(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    svc = hub.docs[doc]
    with client.websocket_connect(f"/documents/{doc}/ws?session={alice['session']}") as ws:
        replica = SequenceCrdt(alice["replica"])
        ws.send_json(edit_frame(replica, 0, "abcdef", 1))
        ws.receive_json()

    posted = client.post(
        f"/documents/{doc}/comments",
        json={"user": "alice", "body": "@aiauthor improve", "anchor": [0, 3]},
    ).json()
    thread_id = posted["thread"]["thread_id"]
    threads = client.get(f"/documents/{doc}/threads").json()
    reply = next(t for t in threads if t["thread_id"] == thread_id)["messages"][-1]
    assert reply["author"] == ["agent", "aiAuthor"]

    view = client.get(f"/threads/{thread_id}/preview/{reply['message_id']}").json()
    assert view == {"original": "abc", "proposed": "Try rephrasing this."}

    consumed = client.post(
        f"/threads/{thread_id}/consume",
        json={"message": reply["message_id"], "action": "append", "user": "alice"},
    )
    assert consumed.status_code == 200
    assert svc.doc.text == "abcTry rephrasing this.def"

    again = client.post(
        f"/threads/{thread_id}/consume",
        json={"message": reply["message_id"], "action": "copy", "user": "bob"},
    )
    assert again.status_code == 409

    ann = consumed.json()["annotation"]["annotation_id"]
    approved = client.post(
        f"/documents/{doc}/annotations/{ann}/approve", json={"user": "alice"}
    ).json()
    assert approved["annotation"]["state"] == "approved"
    snap = client.get(f"/documents/{doc}/snapshot").json()
    assert snap["pending_regions"] == {}


def test_eventual_delivery_replicas_match_server(api):
    client, hub = api
    doc = make_doc(client)["doc"]
    alice = join(client, doc, "Alice")
    bob = join(client, doc, "Bob")
    replica_a = SequenceCrdt(alice["replica"])
    replica_b = SequenceCrdt(bob["replica"])
    from coscribe.crdt import op_from_wire

    with client.websocket_connect(f"/documents/{doc}/ws?session={alice['session']}") as ws_a, \
         client.websocket_connect(f"/documents/{doc}/ws?session={bob['session']}") as ws_b:
        ws_a.send_json(edit_frame(replica_a, 0, "hello ", 1))
        msg = ws_b.receive_json()
        replica_b.integrate_all([op_from_wire(o) for o in msg["payload"]["ops"]])
        ws_b.send_json(edit_frame(replica_b, 6, "world", 1))
        msg_a = ws_a.receive_json()  # own echo
        msg_a2 = ws_a.receive_json()  # bob's edit
        for m in (msg_a, msg_a2):
            if m["payload"].get("origin") != replica_a.replica_id:
                replica_a.integrate_all([op_from_wire(o) for o in m["payload"]["ops"]])
    server_text = hub.docs[doc].doc.text
    assert server_text == "hello world"
    assert replica_a.text == server_text
    assert replica_b.text == server_text
