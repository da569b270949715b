"""In-process harness: a hub on a virtual clock with scripted clients.

Clients keep real replicas and talk to the document owner exactly like the
websocket layer would, so scenario runs exercise the same code paths as the
live server while staying fully deterministic: inline job execution, seeded
ids and join codes, and a recorded total order of broadcast events.
"""

from __future__ import annotations

import hashlib
import json
import threading

from ..clock import VirtualClock
from ..crdt import SequenceCrdt, op_from_wire
from ..gateway import Gateway, MockScript
from ..service import DocumentService, Hub, InlineExecutor, ServiceConfig
from ..store import DocumentStore


class SimClient:
    def __init__(self, service: DocumentService, name: str):
        self.service = service
        # Broadcasts arrive on whichever thread mutated the document, so the
        # local replica needs its own guard when clients run threaded.
        self._lock = threading.Lock()
        info = service.join(name)
        self.user = info["user"]["id"]
        self.session = info["session"]
        self.replica = SequenceCrdt.from_snapshot(
            info["snapshot"]["doc"]["body"], replica_id=info["replica"]
        )
        self.seq = 0
        self.inbox: list[dict] = []
        self._sub = service.subscribe(self._on_message)
        self.online = True

    def _on_message(self, message: dict) -> None:
        with self._lock:
            self.inbox.append(message)
            if not self.online:
                return
            if message["kind"] == "edit_update" and message["payload"].get("origin") != self.replica.replica_id:
                ops = [op_from_wire(o) for o in message["payload"]["ops"]]
                self.replica.integrate_all(ops)

    # ------------------------------------------------------------------

    @property
    def text(self) -> str:
        with self._lock:
            return self.replica.text

    def insert(self, offset: int, text: str) -> None:
        with self._lock:
            ops = self.replica.local_insert(offset, text)
            self.seq += 1
            seq = self.seq
        self.service.apply_edit(self.session, [op.to_wire() for op in ops], seq=seq)

    def delete(self, offset: int, length: int) -> None:
        with self._lock:
            ops = self.replica.local_delete(offset, length)
            self.seq += 1
            seq = self.seq
        self.service.apply_edit(self.session, [op.to_wire() for op in ops], seq=seq)

    def comment(self, body: str, select: tuple[int, int] | None = None, thread: str | None = None) -> dict:
        return self.service.post_comment(self.user, body, anchor_range=select, thread_id=thread)

    def consume(self, thread_id: str, message_id: str, action: str) -> dict:
        return self.service.consume_suggestion(self.user, thread_id, message_id, action)

    def approve(self, annotation_id: str) -> dict:
        return self.service.approve_annotation(self.user, annotation_id)

    def save(self) -> int:
        return self.service.save(self.user)

    def leave(self) -> None:
        self.online = False
        self.service.leave(self.session)

    def messages(self, kind: str | None = None) -> list[dict]:
        return [m for m in self.inbox if kind is None or m["kind"] == kind]


class SimHarness:
    def __init__(
        self,
        mock_rules: list[dict] | None = None,
        mock_script_path: str | None = None,
        config: ServiceConfig | None = None,
        seed: int = 0,
        data_dir: str | None = None,
    ):
        if mock_script_path:
            script = MockScript.from_file(mock_script_path)
            if mock_rules:
                script.rules = MockScript(mock_rules).rules + script.rules
        else:
            script = MockScript(mock_rules or [])
        self.mock = script
        self.clock = VirtualClock()
        self.gateway = Gateway(provider=script, model_id="mock")
        cfg = config or ServiceConfig(seed=seed)
        if seed and cfg.seed != seed:
            cfg.seed = seed
        store = DocumentStore(data_dir) if data_dir else None
        self.hub = Hub(
            config=cfg,
            clock=self.clock,
            gateway=self.gateway,
            store=store,
            executor=InlineExecutor(),
        )
        self.events: list[dict] = []
        self.clients: dict[str, SimClient] = {}

    # ------------------------------------------------------------------

    def create_document(self, goal_text: str = "", doc_id: str | None = None) -> DocumentService:
        service = self.hub.create_document(goal_text=goal_text, doc_id=doc_id)
        service.subscribe(self.events.append)
        return service

    def client(self, service: DocumentService, name: str) -> SimClient:
        """Existing online client by name, or a fresh join (rejoining after
        leave makes a new session that resyncs from the snapshot)."""
        key = name.lower()
        existing = self.clients.get(key)
        if existing is None or not existing.online:
            if existing is not None:
                existing.service.unsubscribe(existing._sub)
            self.clients[key] = SimClient(service, name)
        return self.clients[key]

    def advance_to(self, t: float) -> None:
        self.hub.advance_to(t)

    def advance_by(self, seconds: float) -> None:
        self.hub.advance_to(self.clock.now() + seconds)

    # ------------------------------------------------------------------

    def events_of(self, kind: str) -> list[dict]:
        return [e for e in self.events if e["kind"] == kind]

    def fired_triggers(self, service: DocumentService) -> list[tuple[float, str]]:
        return list(service.triggers.fired_log)

    def snapshot_hash(self, service: DocumentService) -> str:
        record = json.dumps(service.to_record(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(record.encode()).hexdigest()
