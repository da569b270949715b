"""Task list and the document-wide execution pipeline.

A run walks four steps: the assignee proposes text segments, low-confidence
and overlapping proposals are filtered (attempted executions are noted on
the overlapped thread), surviving segments each get an agent conversation,
and replies are integrated as new annotated comment threads. Every proposal
ends up in the run log with a terminal outcome.
"""

from __future__ import annotations

import logging
from contextlib import nullcontext
from dataclasses import dataclass, field

from .errors import (
    GatewayError,
    SchemaParseError,
    UnknownTaskError,
    ValidationError,
)
from .gateway import templates

log = logging.getLogger(__name__)

ASSIGN_CONFIDENCE = 0.85
SEGMENT_CONFIDENCE = 0.80

ACCEPTED = "accepted"
FILTERED_OVERLAP = "filtered_overlap"
FILTERED_CONFIDENCE = "filtered_confidence"
INTEGRATION_FAILED = "integration_failed"

MANUAL = "manual"
AUTONOMOUS = "autonomous"

BUILTIN_TOOLS = [
    ("Extend", "Extend the selected text with one or two sentences that continue its train of thought"),
    ("Summarize", "Summarize the selected text concisely in one or two sentences"),
    ("Translate", "Translate the selected text into clear English"),
]


@dataclass
class SegmentRecord:
    selected_text: str
    selected_text_sentence: str
    reason: str
    confidence_rate: float
    outcome: str = ""

    def to_dict(self) -> dict:
        return {
            "selected_text": self.selected_text,
            "selected_text_sentence": self.selected_text_sentence,
            "reason": self.reason,
            "confidence_rate": self.confidence_rate,
            "outcome": self.outcome,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SegmentRecord":
        return cls(**data)


@dataclass
class TaskRunLog:
    run_id: str
    task_id: str
    agent_id: str
    started_at: float
    segments: list[SegmentRecord] = field(default_factory=list)
    annotations: list[str] = field(default_factory=list)
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "task_id": self.task_id,
            "agent_id": self.agent_id,
            "started_at": self.started_at,
            "segments": [s.to_dict() for s in self.segments],
            "annotations": list(self.annotations),
            "error": self.error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskRunLog":
        return cls(
            run_id=data["run_id"],
            task_id=data["task_id"],
            agent_id=data["agent_id"],
            started_at=data["started_at"],
            segments=[SegmentRecord.from_dict(s) for s in data.get("segments", [])],
            annotations=list(data.get("annotations", [])),
            error=data.get("error"),
        )


@dataclass
class AssigneeDecision:
    recommended_agent_id: str
    confidence_rate: float
    applied: bool
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "recommended_agent_id": self.recommended_agent_id,
            "confidence_rate": self.confidence_rate,
            "applied": self.applied,
            "note": self.note,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssigneeDecision":
        return cls(**data)


@dataclass
class TaskSpec:
    task_id: str
    title: str
    description: str
    assignee: str  # agent_id, resolved at creation
    interaction: str = MANUAL
    trigger: str | None = None
    shortcut: bool = False
    creator: str = ""
    builtin: bool = False
    title_stale: bool = False
    assignee_decision: AssigneeDecision | None = None
    notes: list[str] = field(default_factory=list)
    run_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "task_id": self.task_id,
            "title": self.title,
            "description": self.description,
            "assignee": self.assignee,
            "interaction": self.interaction,
            "trigger": self.trigger,
            "shortcut": self.shortcut,
            "creator": self.creator,
            "builtin": self.builtin,
            "title_stale": self.title_stale,
            "assignee_decision": self.assignee_decision.to_dict() if self.assignee_decision else None,
            "notes": list(self.notes),
            "run_ids": list(self.run_ids),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TaskSpec":
        decision = data.get("assignee_decision")
        return cls(
            task_id=data["task_id"],
            title=data["title"],
            description=data["description"],
            assignee=data["assignee"],
            interaction=data.get("interaction", MANUAL),
            trigger=data.get("trigger"),
            shortcut=data.get("shortcut", False),
            creator=data.get("creator", ""),
            builtin=data.get("builtin", False),
            title_stale=data.get("title_stale", False),
            assignee_decision=AssigneeDecision.from_dict(decision) if decision else None,
            notes=list(data.get("notes", [])),
            run_ids=list(data.get("run_ids", [])),
        )


def clamp_title(text: str) -> str:
    return " ".join(text.split()[:4])


def _normalize_with_map(s: str) -> tuple[str, list[int]]:
    """Collapse \\r\\n and \\r to \\n, keeping a map back to raw offsets."""
    out: list[str] = []
    raw_at: list[int] = []
    i = 0
    while i < len(s):
        raw_at.append(i)
        if s[i] == "\r":
            out.append("\n")
            i += 2 if s.startswith("\r\n", i) else 1
        else:
            out.append(s[i])
            i += 1
    raw_at.append(len(s))
    return "".join(out), raw_at


def _normalize(s: str) -> str:
    return s.replace("\r\n", "\n").replace("\r", "\n")


def locate_segment(body: str, selected_text: str, selected_text_sentence: str) -> tuple[int, int] | None:
    """Raw offsets of the proposal's text: first occurrence of the sentence,
    then the first occurrence of selected_text at or after it; falls back to
    the first global occurrence. Exact matching after newline normalization."""
    norm, raw_at = _normalize_with_map(body)
    sel = _normalize(selected_text)
    sentence = _normalize(selected_text_sentence)
    if not sel:
        return None
    pos = -1
    if sentence:
        at = norm.find(sentence)
        if at >= 0:
            pos = norm.find(sel, at)
    if pos < 0:
        pos = norm.find(sel)
    if pos < 0:
        return None
    return raw_at[pos], raw_at[pos + len(sel)]


class TaskEngine:
    def __init__(self, doc, registry, comments, gateway, ids, clock):
        self.doc = doc
        self.registry = registry
        self.comments = comments
        self.gateway = gateway
        self.ids = ids
        self.clock = clock
        self.tasks: dict[str, TaskSpec] = {}
        self.runs: dict[str, TaskRunLog] = {}
        self._running: set[str] = set()

    # ------------------------------------------------------------------
    # Creation and editing
    # ------------------------------------------------------------------

    def create_task(
        self,
        creator: str,
        description: str,
        assignee: str | None = None,
        interaction: str = MANUAL,
        trigger: str | None = None,
        shortcut: bool = False,
    ) -> TaskSpec:
        self._validate(description, interaction, trigger)
        decision = None
        if assignee is None or assignee == "auto":
            decision = self.auto_assign(description)
            assignee_id = decision.recommended_agent_id if decision.applied else self.registry.default_agent().agent_id
        else:
            assignee_id = self.registry.get(assignee).agent_id
        title, stale = self._make_title(description)
        task = TaskSpec(
            task_id=self.ids.next("t"),
            title=title,
            description=description,
            assignee=assignee_id,
            interaction=interaction,
            trigger=trigger,
            shortcut=shortcut,
            creator=creator,
            title_stale=stale,
            assignee_decision=decision,
        )
        self.tasks[task.task_id] = task
        return task

    def seed_builtin_tools(self) -> list[TaskSpec]:
        """Default toolbar tools; fixed titles, assigned to the default agent."""
        seeded = []
        default_id = self.registry.default_agent().agent_id
        for title, description in BUILTIN_TOOLS:
            task = TaskSpec(
                task_id=self.ids.next("t"),
                title=title,
                description=description,
                assignee=default_id,
                shortcut=True,
                creator="system",
                builtin=True,
            )
            self.tasks[task.task_id] = task
            seeded.append(task)
        return seeded

    def update_task(self, task_id: str, editor: str, **fields) -> TaskSpec:
        task = self.get(task_id)
        allowed = {"description", "assignee", "interaction", "trigger", "shortcut"}
        unknown = set(fields) - allowed
        if unknown:
            raise ValidationError(f"cannot update fields: {sorted(unknown)}")
        description = fields.get("description", task.description)
        interaction = fields.get("interaction", task.interaction)
        trigger = fields.get("trigger", task.trigger) if "trigger" in fields or "interaction" in fields else task.trigger
        if interaction == MANUAL and "interaction" in fields and "trigger" not in fields:
            trigger = None
        self._validate(description, interaction, trigger)
        if "assignee" in fields:
            if fields["assignee"] in (None, "auto"):
                decision = self.auto_assign(description)
                task.assignee_decision = decision
                task.assignee = (
                    decision.recommended_agent_id if decision.applied else self.registry.default_agent().agent_id
                )
            else:
                task.assignee = self.registry.get(fields["assignee"]).agent_id
        if description != task.description:
            task.description = description
            task.title, task.title_stale = self._make_title(description)
        task.interaction = interaction
        task.trigger = trigger
        task.shortcut = fields.get("shortcut", task.shortcut)
        return task

    def delete_task(self, task_id: str) -> TaskSpec:
        task = self.get(task_id)
        del self.tasks[task_id]
        return task

    def _validate(self, description: str, interaction: str, trigger: str | None) -> None:
        from .triggers import TRIGGER_KINDS

        if not description or not description.strip():
            raise ValidationError("task description must not be empty")
        if interaction not in (MANUAL, AUTONOMOUS):
            raise ValidationError(f"unknown interaction type {interaction!r}")
        if interaction == AUTONOMOUS and trigger is None:
            raise ValidationError("autonomous tasks need a trigger")
        if interaction == MANUAL and trigger is not None:
            raise ValidationError("manual tasks cannot have a trigger")
        if trigger is not None and trigger not in TRIGGER_KINDS:
            raise ValidationError(f"unknown trigger {trigger!r}")

    def _make_title(self, description: str) -> tuple[str, bool]:
        try:
            raw = self.gateway.request(templates.TASK_TITLE, {"description": description})
            return clamp_title(raw), False
        except (GatewayError, SchemaParseError) as e:
            log.warning("title generation failed, falling back to description: %s", e)
            return clamp_title(description), True

    # ------------------------------------------------------------------
    # Assignee selection
    # ------------------------------------------------------------------

    def auto_assign(self, description: str) -> AssigneeDecision:
        default = self.registry.default_agent()
        agents = self.registry.all()
        try:
            parsed = self.gateway.request(
                templates.ASSIGNEE_SELECT,
                {
                    "task_description": description,
                    "agents_info": templates.agents_info_block(agents),
                },
            )
        except (GatewayError, SchemaParseError) as e:
            log.warning("assignee selection failed: %s", e)
            return AssigneeDecision(default.agent_id, 0.0, applied=False, note=f"malformed: {e}")
        agent_id = parsed["agent_id"]
        confidence = parsed["confidence_rate"]
        if agent_id not in self.registry.agents:
            return AssigneeDecision(default.agent_id, 0.0, applied=False, note=f"malformed: unknown agent {agent_id}")
        return AssigneeDecision(agent_id, confidence, applied=confidence >= ASSIGN_CONFIDENCE)

    # ------------------------------------------------------------------
    # Running
    # ------------------------------------------------------------------

    def run_task(self, task_id: str, lock=None, emit=None, selection: tuple[int, int] | None = None) -> TaskRunLog | None:
        """Execute the pipeline. Returns None when coalesced into an
        in-flight run. `lock` guards document re-entry between model calls;
        `emit(kind, payload)` broadcasts integration events."""
        lock = lock if lock is not None else nullcontext()
        emit = emit if emit is not None else (lambda kind, payload: None)

        with lock:
            task = self.get(task_id)
            if task_id in self._running:
                return None  # re-trigger while running is coalesced
            self._running.add(task_id)
            agent = self.registry.get(task.assignee)
            run = TaskRunLog(
                run_id=self.ids.next("run"),
                task_id=task_id,
                agent_id=agent.agent_id,
                started_at=self.clock.now(),
            )
            document_text = self.doc.text
        try:
            if selection is not None:
                with lock:
                    proposals = self._shortcut_proposal(selection)
            elif not document_text:
                proposals = []  # empty document: no model call at all
            else:
                try:
                    proposals = self.gateway.request(
                        templates.SEGMENT_SELECT,
                        {
                            "agent_role": agent.role,
                            "task": task.description,
                            "sections_json": templates.sections_json(agent.sections),
                            "notes": templates.notes_json(agent.notes),
                            "document_text": document_text,
                        },
                    )
                except (GatewayError, SchemaParseError) as e:
                    run.error = f"selection failed: {e}"
                    proposals = []

            with lock:
                plan = self._filter_proposals(proposals, run, emit)

            for record, anchor in plan:
                with lock:
                    messages = self._segment_prompt(agent, task, anchor)
                try:
                    reply = self.gateway.complete(templates.AGENT_INIT, messages)
                except (GatewayError, SchemaParseError) as e:
                    record.outcome = INTEGRATION_FAILED
                    log.warning("segment response failed: %s", e)
                    continue
                with lock:
                    thread, message = self.comments.open_agent_thread(anchor, agent.handle, reply)
                    ann_id = thread.annotation_id
                    run.annotations.append(ann_id)
                    record.outcome = ACCEPTED
                    emit("comment_event", {
                        "event": "agent_comment",
                        "thread": thread.to_dict(),
                        "message": message.to_dict(),
                        "annotation": self.doc.annotations[ann_id].to_dict(),
                    })

            with lock:
                self.runs[run.run_id] = run
                task.run_ids.append(run.run_id)
                self.registry.record_run(agent.agent_id, run.run_id, run.started_at)
                emit("task_event", {"event": "run_completed", "task": task.task_id, "run": run.to_dict()})
            return run
        finally:
            with lock:
                self._running.discard(task_id)

    def _shortcut_proposal(self, selection: tuple[int, int]) -> list[dict]:
        start, end = selection
        if end <= start:
            raise ValidationError("shortcut runs need a non-empty selection")
        text = self.doc.text[start:end]
        return [{
            "selected_text": text,
            "selected_text_sentence": "",
            "reason": "shortcut run on user selection",
            "confidence_rate": 1.0,
            "_offsets": (start, end),
        }]

    def _filter_proposals(self, proposals: list[dict], run: TaskRunLog, emit) -> list[tuple[SegmentRecord, object]]:
        """Steps 2 of the pipeline: confidence gate, locating, overlap rules.
        Returns (record, anchor) pairs that survive, in proposal order."""
        records = []
        candidates = []  # (index, record, anchor, start_offset)
        for i, p in enumerate(proposals):
            record = SegmentRecord(
                selected_text=p["selected_text"],
                selected_text_sentence=p["selected_text_sentence"],
                reason=p["reason"],
                confidence_rate=p["confidence_rate"],
            )
            records.append(record)
            run.segments.append(record)
            if record.confidence_rate < SEGMENT_CONFIDENCE:
                record.outcome = FILTERED_CONFIDENCE
                continue
            offsets = p.get("_offsets") or locate_segment(
                self.doc.text, p["selected_text"], p["selected_text_sentence"]
            )
            if offsets is None:
                record.outcome = INTEGRATION_FAILED
                continue
            anchor = self.doc.anchor_for_range(*offsets)
            overlapped = self.doc.overlapping_annotations(anchor)
            if overlapped:
                record.outcome = FILTERED_OVERLAP
                for ann in overlapped:
                    self._note_attempted_execution(ann, run, emit)
                continue
            candidates.append((i, record, anchor, offsets[0]))

        # Overlap among this run's own proposals: higher confidence wins,
        # ties go to the earlier document position.
        chosen: list[tuple[int, SegmentRecord, object, int]] = []
        for cand in sorted(candidates, key=lambda c: (-c[1].confidence_rate, c[3])):
            if any(self.doc.anchors_overlap(cand[2], kept[2]) for kept in chosen):
                cand[1].outcome = FILTERED_OVERLAP
                continue
            chosen.append(cand)
        chosen.sort(key=lambda c: c[0])  # back to proposal order
        return [(record, anchor) for _, record, anchor, _ in chosen]

    def _note_attempted_execution(self, annotation, run: TaskRunLog, emit) -> None:
        thread = self.comments.thread_for_annotation(annotation.annotation_id)
        if thread is None:
            return
        task = self.tasks[run.task_id]
        note = self.comments.system_note(
            thread.thread_id,
            f"Task '{task.title}' ({run.run_id}) attempted to execute on this text but it is already annotated.",
        )
        emit("comment_event", {
            "event": "attempted_execution",
            "thread": thread.to_dict(),
            "message": note.to_dict(),
        })

    def _segment_prompt(self, agent, task: TaskSpec, anchor) -> list[dict]:
        init = templates.render(
            templates.AGENT_INIT,
            {
                "agent_name": agent.name,
                "agent_role": agent.role,
                "sections_json": templates.sections_json(agent.sections),
                "notes": templates.notes_json(agent.notes),
            },
        )
        opening = templates.conversation_opening(
            document_text=self.doc.text,
            goal_text=self.doc.goal_text,
            selected_text=self.doc.anchor_text(anchor),
            history=[],
            ask=task.description,
        )
        return init + [{"role": "user", "content": opening}]

    # ------------------------------------------------------------------
    # Lookup and maintenance
    # ------------------------------------------------------------------

    def get(self, task_id: str) -> TaskSpec:
        try:
            return self.tasks[task_id]
        except KeyError:
            raise UnknownTaskError(f"unknown task {task_id}") from None

    def all(self) -> list[TaskSpec]:
        return list(self.tasks.values())

    def shortcuts(self) -> list[dict]:
        return [{"task_id": t.task_id, "title": t.title} for t in self.tasks.values() if t.shortcut]

    def autonomous_for(self, trigger_kind: str) -> list[TaskSpec]:
        return [t for t in self.tasks.values() if t.interaction == AUTONOMOUS and t.trigger == trigger_kind]

    def runs_for(self, task_id: str) -> list[TaskRunLog]:
        task = self.get(task_id)
        return [self.runs[rid] for rid in task.run_ids if rid in self.runs]

    def reassign_agent_tasks(self, agent_id: str, to_agent_id: str, note: str) -> list[TaskSpec]:
        changed = []
        for task in self.tasks.values():
            if task.assignee == agent_id:
                task.assignee = to_agent_id
                task.notes.append(note)
                changed.append(task)
        return changed

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "tasks": [t.to_dict() for t in self.tasks.values()],
            "runs": [r.to_dict() for r in self.runs.values()],
        }

    def restore(self, data: dict) -> None:
        self.tasks = {}
        self.runs = {}
        for raw in data.get("tasks", []):
            task = TaskSpec.from_dict(raw)
            self.tasks[task.task_id] = task
        for raw in data.get("runs", []):
            run = TaskRunLog.from_dict(raw)
            self.runs[run.run_id] = run
