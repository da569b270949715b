"""Per-document owner and the hub that manages all documents.

Every mutation of a document funnels through its DocumentService, which
holds one reentrant lock: REST handlers, websocket readers, and background
jobs all serialize here. Model calls run outside the lock (the task and
comment engines re-enter for integration), so editing stays responsive
while agents work.
"""

from __future__ import annotations

import logging
import os
import random
import re
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .agents import AgentRegistry
from .clock import Clock, SystemClock, VirtualClock
from .comments import CommentEngine
from .crdt import op_from_wire
from .document import ReplicatedDocument
from .errors import (
    GatewayError,
    ProtocolViolation,
    SchemaParseError,
    UnknownDocumentError,
    ValidationError,
)
from .ids import IdFactory, make_join_code
from .store import DocumentStore
from .tasks import TaskEngine
from .triggers import TriggerConfig, TriggerEngine

log = logging.getLogger(__name__)


@dataclass
class ServiceConfig:
    interval_minutes: float = 5.0
    inactivity_minutes: float = 2.0
    collab_edit_threshold: int = 2
    max_agent_turns: int = 4
    allow_agent_mentions: bool = False
    checkpoint_interval_s: float = 60.0
    admin_token: str = ""
    seed: int = 0

    def trigger_config(self) -> TriggerConfig:
        return TriggerConfig(
            interval_minutes=self.interval_minutes,
            inactivity_minutes=self.inactivity_minutes,
            collab_edit_threshold=self.collab_edit_threshold,
        )

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ServiceConfig":
        """Accepts dotted config keys (trigger.interval_minutes, ...) or
        plain field names."""
        aliases = {
            "trigger.interval_minutes": "interval_minutes",
            "trigger.inactivity_minutes": "inactivity_minutes",
            "trigger.collab_edit_threshold": "collab_edit_threshold",
            "comments.max_agent_turns": "max_agent_turns",
        }
        kwargs = {}
        for key, value in mapping.items():
            field_name = aliases.get(key, key)
            if field_name in cls.__dataclass_fields__:
                kwargs[field_name] = value
        return cls(**kwargs)

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        env = os.environ
        return cls(
            interval_minutes=float(env.get("TRIGGER_INTERVAL_MINUTES", 5)),
            inactivity_minutes=float(env.get("TRIGGER_INACTIVITY_MINUTES", 2)),
            collab_edit_threshold=int(env.get("TRIGGER_COLLAB_EDIT_THRESHOLD", 2)),
            max_agent_turns=int(env.get("MAX_AGENT_TURNS", 4)),
            checkpoint_interval_s=float(env.get("CHECKPOINT_INTERVAL_S", 60)),
            admin_token=env.get("ADMIN_TOKEN", ""),
        )


class InlineExecutor:
    """Runs jobs immediately on the caller thread (deterministic)."""

    def submit(self, fn, *args) -> None:
        fn(*args)


class BackgroundExecutor:
    """Thread-pool execution for live deployments."""

    def __init__(self, max_workers: int = 4):
        self.pool = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="coscribe-job")

    def submit(self, fn, *args) -> None:
        future = self.pool.submit(fn, *args)
        future.add_done_callback(self._log_failure)

    @staticmethod
    def _log_failure(future) -> None:
        exc = future.exception()
        if exc is not None:
            log.exception("background job failed", exc_info=exc)


def _user_id_for(name: str) -> str:
    uid = re.sub(r"[^A-Za-z0-9]", "", name).lower()
    if not uid:
        raise ValidationError(f"user name {name!r} yields no usable identifier")
    if uid in ("server", "system"):
        raise ValidationError(f"user name {name!r} is reserved")
    return uid


class DocumentService:
    def __init__(
        self,
        doc_id: str,
        goal_text: str,
        join_code: str,
        clock: Clock,
        gateway,
        executor,
        config: ServiceConfig,
        store: DocumentStore | None = None,
        created_at: float | None = None,
    ):
        self.lock = threading.RLock()
        self.doc_id = doc_id
        self.join_code = join_code
        self.clock = clock
        self.gateway = gateway
        self.executor = executor
        self.config = config
        self.store = store
        self.created_at = created_at if created_at is not None else clock.now()

        self.ids = IdFactory()
        self.doc = ReplicatedDocument(doc_id, goal_text, replica_id="srv")
        self.registry = AgentRegistry(gateway=gateway, ids=self.ids)
        self.comments = CommentEngine(
            doc=self.doc, registry=self.registry, ids=self.ids, clock=clock, members=self.member_ids
        )
        self.tasks = TaskEngine(
            doc=self.doc, registry=self.registry, comments=self.comments,
            gateway=gateway, ids=self.ids, clock=clock,
        )
        self.tasks.seed_builtin_tools()
        self.triggers = TriggerEngine(self.doc, clock, config.trigger_config())

        self.users: dict[str, str] = {}  # user_id -> display name
        self.sessions: dict[str, dict] = {}
        self.subscribers: dict[str, object] = {}
        self.event_seq = 0
        self._dirty = False
        self._last_checkpoint_at = self.created_at

    # ------------------------------------------------------------------
    # Membership and presence
    # ------------------------------------------------------------------

    def member_ids(self) -> set[str]:
        return set(self.users)

    def _online_users(self) -> dict[str, float]:
        online: dict[str, float] = {}
        for sess in self.sessions.values():
            if sess["online"]:
                uid = sess["user"]
                online[uid] = max(online.get(uid, 0.0), sess["last_activity"])
        return online

    def presence(self) -> list[dict]:
        return [
            {"id": uid, "name": self.users.get(uid, uid), "last_activity": at}
            for uid, at in sorted(self._online_users().items())
        ]

    def join(self, name: str) -> dict:
        with self.lock:
            uid = _user_id_for(name)
            prior_empty = not self._online_users()
            self.users.setdefault(uid, name)
            session_id = self.ids.next("s")
            replica = f"{uid}-{self.ids.next('rep')}"
            self.sessions[session_id] = {
                "user": uid,
                "replica": replica,
                "online": True,
                "last_activity": self.clock.now(),
                "last_seq": 0,
            }
            self._dirty = True
            self.broadcast("presence", ("user", uid), {"event": "join", "online": self.presence()})
            fired = self.triggers.on_event("join", prior_empty=prior_empty)
            self._fire_all(fired)
            return {
                "doc": self.doc_id,
                "join_code": self.join_code,
                "user": {"id": uid, "name": name},
                "session": session_id,
                "replica": replica,
                "seq": self.event_seq,
                "snapshot": self.snapshot_payload(),
            }

    def leave(self, session_id: str) -> None:
        with self.lock:
            sess = self.sessions.get(session_id)
            if sess is None or not sess["online"]:
                return
            sess["online"] = False
            uid = sess["user"]
            now_empty = not self._online_users()
            self.broadcast("presence", ("user", uid), {"event": "leave", "online": self.presence()})
            fired = self.triggers.on_event("leave", now_empty=now_empty)
            self._fire_all(fired)

    def _session(self, session_id: str) -> dict:
        sess = self.sessions.get(session_id)
        if sess is None:
            raise ValidationError(f"unknown session {session_id}")
        return sess

    def _touch(self, session: dict) -> None:
        session["last_activity"] = self.clock.now()

    # ------------------------------------------------------------------
    # Broadcast
    # ------------------------------------------------------------------

    def subscribe(self, fn) -> str:
        with self.lock:
            sub_id = self.ids.next("sub")
            self.subscribers[sub_id] = fn
            return sub_id

    def unsubscribe(self, sub_id: str) -> None:
        with self.lock:
            self.subscribers.pop(sub_id, None)

    def broadcast(self, kind: str, sender: tuple[str, str], payload: dict) -> dict:
        self.event_seq += 1
        message = {
            "kind": kind,
            "doc": self.doc_id,
            "sender": {"type": sender[0], "id": sender[1]},
            "seq": self.event_seq,
            "payload": payload,
        }
        for fn in list(self.subscribers.values()):
            try:
                fn(message)
            except Exception:
                log.exception("subscriber failed for %s", kind)
        return message

    # ------------------------------------------------------------------
    # Editing
    # ------------------------------------------------------------------

    def apply_edit(self, session_id: str, wire_ops: list[dict], seq: int | None = None) -> None:
        with self.lock:
            sess = self._session(session_id)
            if seq is not None:
                if seq <= sess["last_seq"]:
                    raise ProtocolViolation(
                        f"edit seq {seq} out of order (last was {sess['last_seq']})"
                    )
                sess["last_seq"] = seq
            ops = [op_from_wire(o) for o in wire_ops]
            self.doc.apply_edit(ops, origin_user=sess["user"], strict=True)
            self._touch(sess)
            self._dirty = True
            self.broadcast(
                "edit_update",
                ("user", sess["user"]),
                {"ops": wire_ops, "origin": sess["replica"]},
            )
            fired = self.triggers.on_event("edit", user=sess["user"])
            self._checkpoint_if_due()
            self._fire_all(fired)

    # ------------------------------------------------------------------
    # Comments
    # ------------------------------------------------------------------

    def post_comment(
        self,
        user: str,
        body: str,
        anchor_range: tuple[int, int] | None = None,
        thread_id: str | None = None,
    ) -> dict:
        with self.lock:
            anchor = self.doc.anchor_for_range(*anchor_range) if anchor_range is not None else None
            thread, message, handles = self.comments.post_comment(
                user, body, anchor=anchor, thread_id=thread_id
            )
            self._dirty = True
            payload = {"event": "message", "thread": thread.to_dict(), "message": message.to_dict()}
            if anchor is not None:
                payload["annotation"] = self.doc.annotations[thread.annotation_id].to_dict()
            self.broadcast("comment_event", ("user", user), payload)
            fired = self.triggers.on_event("comment", user=user)
            if handles:
                capped = handles[: self.config.max_agent_turns]
                self.executor.submit(self._agent_reply_job, thread.thread_id, capped, message.message_id)
            self._fire_all(fired)
            return {"thread": thread.to_dict(), "message": message.to_dict(), "agents": handles}

    def _agent_reply_job(self, thread_id: str, handles: list[str], ask_message_id: str) -> None:
        for handle in handles:
            with self.lock:
                thread = self.comments.threads.get(thread_id)
                if thread is None or thread.resolved:
                    self.comments.discarded.append({"thread_id": thread_id, "agent": handle, "body": None})
                    log.info("skipping agent %s: thread %s resolved", handle, thread_id)
                    break
                messages = self.comments.build_agent_prompt(thread_id, handle, ask_message_id)
                self.broadcast(
                    "agent_typing",
                    ("agent", handle),
                    {"agent": handle, "thread": thread_id, "state": "start"},
                )
            try:
                reply = self.gateway.complete("agent_init", messages)
            except (GatewayError, SchemaParseError) as e:
                log.warning("agent %s unavailable: %s", handle, e)
                with self.lock:
                    note = self.comments.agent_failure_note(thread_id)
                    self.broadcast(
                        "comment_event",
                        ("agent", handle),
                        {"event": "agent_unavailable", "thread": thread_id, "message": note.to_dict()},
                    )
                continue
            with self.lock:
                message = self.comments.store_agent_reply(thread_id, handle, reply)
                if message is None:
                    self.broadcast(
                        "error",
                        ("agent", handle),
                        {"thread": thread_id, "reason": "reply discarded: thread resolved"},
                    )
                    continue
                self._dirty = True
                self.broadcast(
                    "comment_event",
                    ("agent", handle),
                    {
                        "event": "agent_reply",
                        "thread": thread_id,
                        "message": message.to_dict(),
                        "suggestion": message.suggestion.to_dict() if message.suggestion else None,
                    },
                )

    def consume_suggestion(self, user: str, thread_id: str, message_id: str, action: str) -> dict:
        with self.lock:
            ops = self.comments.consume_suggestion(thread_id, message_id, action, user)
            thread = self.comments.threads[thread_id]
            annotation = self.doc.annotations[thread.annotation_id]
            self._dirty = True
            if ops:
                self.broadcast(
                    "edit_update",
                    ("user", user),
                    {"ops": [op.to_wire() for op in ops], "origin": self.doc.body.replica_id},
                )
            self.broadcast(
                "comment_event",
                ("user", user),
                {
                    "event": "consumed",
                    "thread": thread_id,
                    "message": message_id,
                    "action": action,
                    "annotation": annotation.to_dict(),
                },
            )
            fired = self.triggers.on_event("comment", user=user)
            self._fire_all(fired)
            return {"annotation": annotation.to_dict(), "action": action}

    def preview_suggestion(self, thread_id: str, message_id: str) -> dict:
        with self.lock:
            return self.comments.preview_side_by_side(thread_id, message_id)

    def approve_annotation(self, user: str, annotation_id: str) -> dict:
        with self.lock:
            annotation = self.doc.approve_annotation(annotation_id)
            thread = self.comments.thread_for_annotation(annotation_id)
            if thread is not None:
                self.comments.resolve_thread(thread.thread_id)
            self._dirty = True
            self.broadcast(
                "comment_event",
                ("user", user),
                {
                    "event": "approved",
                    "annotation": annotation.to_dict(),
                    "thread": thread.thread_id if thread else None,
                },
            )
            fired = self.triggers.on_event("comment", user=user)
            self._fire_all(fired)
            return {"annotation": annotation.to_dict()}

    def close_annotation(self, user: str, annotation_id: str) -> dict:
        with self.lock:
            annotation = self.doc.close_annotation(annotation_id)
            thread = self.comments.thread_for_annotation(annotation_id)
            if thread is not None:
                self.comments.resolve_thread(thread.thread_id)
            self._dirty = True
            self.broadcast(
                "comment_event",
                ("user", user),
                {
                    "event": "closed",
                    "annotation": annotation.to_dict(),
                    "thread": thread.thread_id if thread else None,
                },
            )
            return {"annotation": annotation.to_dict()}

    # ------------------------------------------------------------------
    # Agents
    # ------------------------------------------------------------------

    def create_agent(self, user: str, name: str, role: str = "", sections=None, notes=None, strip_filler=False) -> dict:
        with self.lock:
            profile = self.registry.create(user, name, role, sections, notes, strip_filler)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "agent_created", "agent": profile.to_dict()})
            return profile.to_dict()

    def instantiate_preset(self, user: str, preset_id: str) -> dict:
        with self.lock:
            profile = self.registry.instantiate_preset(user, preset_id)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "agent_created", "agent": profile.to_dict()})
            return profile.to_dict()

    def update_agent(self, user: str, agent_id: str, **fields) -> dict:
        with self.lock:
            profile = self.registry.update(agent_id, user, **fields)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "agent_updated", "agent": profile.to_dict()})
            return profile.to_dict()

    def delete_agent(self, user: str, agent_id: str) -> dict:
        with self.lock:
            profile = self.registry.delete(agent_id)
            default = self.registry.default_agent()
            reassigned = self.tasks.reassign_agent_tasks(
                agent_id,
                default.agent_id,
                note=f"reassigned to @{default.handle}: agent @{profile.handle} was deleted",
            )
            self._dirty = True
            self.broadcast(
                "task_event",
                ("user", user),
                {
                    "event": "agent_deleted",
                    "agent": profile.to_dict(),
                    "reassigned_tasks": [t.task_id for t in reassigned],
                },
            )
            return {"agent": profile.to_dict(), "reassigned": [t.task_id for t in reassigned]}

    def suggest_section_values(self, agent_id: str, section: str, current: list[str]) -> list[str]:
        # Gateway call; safe without the lock, the registry only reads.
        return self.registry.suggest_section_values(agent_id, section, current)

    def agent_history(self, agent_id: str) -> list[dict]:
        with self.lock:
            profile = self.registry.get(agent_id)
            return [
                self.tasks.runs[rid].to_dict()
                for rid in profile.run_ids()
                if rid in self.tasks.runs
            ]

    # ------------------------------------------------------------------
    # Tasks
    # ------------------------------------------------------------------

    def create_task(self, user: str, description: str, assignee=None, interaction="manual", trigger=None, shortcut=False) -> dict:
        with self.lock:
            task = self.tasks.create_task(user, description, assignee, interaction, trigger, shortcut)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "task_created", "task": task.to_dict()})
            return task.to_dict()

    def update_task(self, user: str, task_id: str, **fields) -> dict:
        with self.lock:
            task = self.tasks.update_task(task_id, user, **fields)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "task_updated", "task": task.to_dict()})
            return task.to_dict()

    def delete_task(self, user: str, task_id: str) -> dict:
        with self.lock:
            task = self.tasks.delete_task(task_id)
            self._dirty = True
            self.broadcast("task_event", ("user", user), {"event": "task_deleted", "task": task.to_dict()})
            return task.to_dict()

    def run_task(self, task_id: str, selection: tuple[int, int] | None = None):
        """Manual run; blocks until the pipeline completes."""
        task = self.tasks.get(task_id)
        agent = self.registry.get(task.assignee)
        emit = self._job_emitter(agent.handle)
        run = self.tasks.run_task(task_id, lock=self.lock, emit=emit, selection=selection)
        if run is not None:
            self._record_run(run)
        return run

    def _job_emitter(self, agent_handle: str):
        def emit(kind: str, payload: dict) -> None:
            self.broadcast(kind, ("agent", agent_handle), payload)

        return emit

    def _record_run(self, run) -> None:
        with self.lock:
            self._dirty = True
            if self.store is not None:
                self.store.append_run_log(self.doc_id, run.to_dict())

    # ------------------------------------------------------------------
    # Triggers and time
    # ------------------------------------------------------------------

    def _fire_all(self, kinds: list[str]) -> None:
        for kind in kinds:
            matching = self.tasks.autonomous_for(kind)
            self.broadcast(
                "task_event",
                ("user", "system"),
                {"event": "trigger_fired", "trigger": kind, "tasks": [t.task_id for t in matching]},
            )
            if matching:
                task_ids = [t.task_id for t in matching]
                self.executor.submit(self._run_fired_tasks, task_ids)

    def _run_fired_tasks(self, task_ids: list[str]) -> None:
        for task_id in task_ids:  # sequential per document
            try:
                task = self.tasks.get(task_id)
                agent = self.registry.get(task.assignee)
                run = self.tasks.run_task(task_id, lock=self.lock, emit=self._job_emitter(agent.handle))
                if run is not None:
                    self._record_run(run)
            except Exception:
                log.exception("autonomous run failed for task %s", task_id)

    def tick(self) -> None:
        with self.lock:
            fired = self.triggers.on_event("tick")
            self._checkpoint_if_due()
            self._fire_all(fired)

    # ------------------------------------------------------------------
    # Saving and snapshots
    # ------------------------------------------------------------------

    def save(self, user: str | None = None) -> int:
        with self.lock:
            self.doc.save_counter += 1
            version = self._persist()
            self.broadcast(
                "save",
                ("user", user or "system"),
                {"version": version, "save_counter": self.doc.save_counter},
            )
            fired = self.triggers.on_event("save")
            self._fire_all(fired)
            return version

    def _persist(self) -> int:
        if self.store is None:
            return self.doc.save_counter
        version = self.store.save(self.doc_id, self.to_record())
        self._dirty = False
        self._last_checkpoint_at = self.clock.now()
        return version

    def _checkpoint_if_due(self) -> None:
        if (
            self.store is not None
            and self._dirty
            and self.clock.now() - self._last_checkpoint_at >= self.config.checkpoint_interval_s
        ):
            self._persist()

    def snapshot_payload(self) -> dict:
        return {
            "doc": self.doc.to_snapshot(),
            "goal_text": self.doc.goal_text,
            "text": self.doc.text,
            "agents": [a.to_dict() for a in self.registry.all()],
            "tasks": [t.to_dict() for t in self.tasks.all()],
            "threads": [t.to_dict() for t in self.comments.threads.values()],
            "shortcuts": self.tasks.shortcuts(),
            "presence": self.presence(),
            "pending_regions": {k: list(v) for k, v in self.doc.pending_regions().items()},
            "seq": self.event_seq,
        }

    def to_record(self) -> dict:
        return {
            "format": "coscribe-record",
            "version": 1,
            "metadata": {
                "doc_id": self.doc_id,
                "join_code": self.join_code,
                "goal_text": self.doc.goal_text,
                "created_at": self.created_at,
            },
            "snapshot": self.doc.to_snapshot(),
            "agents": self.registry.to_dict(),
            "threads": self.comments.to_dict(),
            "tasks": self.tasks.to_dict(),
            "ids": self.ids.to_dict(),
            "members": dict(self.users),
            "event_seq": self.event_seq,
        }

    def restore_record(self, record: dict) -> None:
        meta = record.get("metadata", {})
        self.join_code = meta.get("join_code", self.join_code)
        self.created_at = meta.get("created_at", self.created_at)
        self.doc = ReplicatedDocument.from_snapshot(record["snapshot"], replica_id="srv")
        self.ids = IdFactory.from_dict(record.get("ids", {}))
        self.registry.ids = self.ids
        self.registry.restore(record.get("agents", {}))
        self.comments.doc = self.doc
        self.comments.ids = self.ids
        self.comments.restore(record.get("threads", {}))
        self.tasks.doc = self.doc
        self.tasks.ids = self.ids
        self.tasks.restore(record.get("tasks", {}))
        self.triggers.doc = self.doc
        self.users = dict(record.get("members", {}))
        self.event_seq = int(record.get("event_seq", 0))
        self._dirty = False


class Hub:
    """All documents of one deployment; resolves ids and join codes."""

    def __init__(
        self,
        config: ServiceConfig | None = None,
        clock: Clock | None = None,
        gateway=None,
        store: DocumentStore | None = None,
        executor=None,
    ):
        self.config = config or ServiceConfig()
        self.clock = clock or SystemClock()
        self.gateway = gateway
        self.store = store
        self.executor = executor or InlineExecutor()
        self.rng = random.Random(self.config.seed)
        self.ids = IdFactory()
        self.docs: dict[str, DocumentService] = {}

    def create_document(self, goal_text: str = "", doc_id: str | None = None) -> DocumentService:
        doc_id = doc_id or self.ids.next("doc")
        if doc_id in self.docs:
            raise ValidationError(f"document {doc_id} already exists")
        join_code = make_join_code(self.rng)
        service = DocumentService(
            doc_id=doc_id,
            goal_text=goal_text,
            join_code=join_code,
            clock=self.clock,
            gateway=self.gateway,
            executor=self.executor,
            config=self.config,
            store=self.store,
        )
        self.docs[doc_id] = service
        if self.store is not None:
            service._persist()
        return service

    def resolve(self, ref: str) -> DocumentService:
        """Find a document by id or join code, loading from storage if needed."""
        if ref in self.docs:
            return self.docs[ref]
        for service in self.docs.values():
            if service.join_code == ref:
                return service
        if self.store is not None:
            for doc_id in self.store.list_ids():
                if doc_id in self.docs:
                    continue
                record = self.store.load(doc_id)
                meta = record.get("metadata", {})
                if doc_id == ref or meta.get("join_code") == ref:
                    return self._load_from_record(doc_id, record)
        raise UnknownDocumentError(f"invalid join code or document id: {ref}")

    def _load_from_record(self, doc_id: str, record: dict) -> DocumentService:
        meta = record.get("metadata", {})
        service = DocumentService(
            doc_id=doc_id,
            goal_text=meta.get("goal_text", ""),
            join_code=meta.get("join_code", ""),
            clock=self.clock,
            gateway=self.gateway,
            executor=self.executor,
            config=self.config,
            store=self.store,
            created_at=meta.get("created_at"),
        )
        service.restore_record(record)
        self.docs[doc_id] = service
        return service

    def list_documents(self) -> list[dict]:
        ids = set(self.docs)
        if self.store is not None:
            ids.update(self.store.list_ids())
        out = []
        for doc_id in sorted(ids):
            service = self.resolve(doc_id)
            out.append({
                "doc": doc_id,
                "join_code": service.join_code,
                "goal_text": service.doc.goal_text,
                "members": len(service.users),
            })
        return out

    def _load_stored_documents(self) -> None:
        if self.store is None:
            return
        for doc_id in self.store.list_ids():
            if doc_id not in self.docs:
                self._load_from_record(doc_id, self.store.load(doc_id))

    def find_agent(self, agent_id: str):
        for attempt in range(2):
            for service in self.docs.values():
                if agent_id in service.registry.agents:
                    return service, service.registry.get(agent_id)
            if attempt == 0:
                self._load_stored_documents()
        raise UnknownDocumentError(f"no document owns agent {agent_id}")

    def find_task(self, task_id: str):
        for attempt in range(2):
            for service in self.docs.values():
                if task_id in service.tasks.tasks:
                    return service, service.tasks.get(task_id)
            if attempt == 0:
                self._load_stored_documents()
        raise UnknownDocumentError(f"no document owns task {task_id}")

    def find_thread(self, thread_id: str):
        for attempt in range(2):
            for service in self.docs.values():
                if thread_id in service.comments.threads:
                    return service, service.comments.threads[thread_id]
            if attempt == 0:
                self._load_stored_documents()
        raise UnknownDocumentError(f"no document owns thread {thread_id}")

    def advance_to(self, target: float) -> None:
        """Drive the virtual clock to `target`, ticking each document at each
        pending trigger deadline in chronological order."""
        if not isinstance(self.clock, VirtualClock):
            raise ValidationError("advance_to requires a virtual clock")
        while True:
            upcoming = [
                (deadline, doc_id)
                for doc_id, service in self.docs.items()
                if (deadline := service.triggers.next_deadline()) is not None and deadline <= target
            ]
            if not upcoming:
                break
            deadline, doc_id = min(upcoming)
            if deadline > self.clock.now():
                self.clock.set(deadline)
            self.docs[doc_id].tick()
        if target > self.clock.now():
            self.clock.set(target)
