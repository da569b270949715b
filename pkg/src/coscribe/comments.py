"""Anchored comment threads shared by users and agents.

Agents never touch the body text from here: their replies carry a suggestion
payload, and the only path into the document is consume (append/replace),
which stages pending text for explicit approval.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field

from .document import OPEN, ReplicatedDocument, TextAnchor
from .errors import (
    AlreadyConsumedError,
    AnnotationClosedError,
    SpanVanishedError,
    ThreadResolvedError,
    UnknownThreadError,
    ValidationError,
)
from .gateway import templates

log = logging.getLogger(__name__)

Identity = tuple[str, str]  # ("user" | "agent" | "system", id)

_MENTION = re.compile(r"@([A-Za-z0-9]+)")
_FILLER = re.compile(
    r"^(?:sure|certainly|of course|absolutely|okay|great|no problem|happy to help|"
    r"here(?:'s| is| are)|i(?:'ve| have) (?:drafted|written|prepared))\b[^\n:!.]*[:!.]\s*",
    re.IGNORECASE,
)


@dataclass
class SuggestionPayload:
    proposed_text: str
    source_agent: str
    consumed_by: str | None = None
    consumed_by_user: str | None = None

    def to_dict(self) -> dict:
        return {
            "proposed_text": self.proposed_text,
            "source_agent": self.source_agent,
            "consumed_by": self.consumed_by,
            "consumed_by_user": self.consumed_by_user,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SuggestionPayload":
        return cls(**data)


@dataclass
class Message:
    message_id: str
    author: Identity
    body: str
    mentions: list[str] = field(default_factory=list)
    suggestion: SuggestionPayload | None = None
    timestamp: float = 0.0

    def to_dict(self) -> dict:
        return {
            "message_id": self.message_id,
            "author": list(self.author),
            "body": self.body,
            "mentions": list(self.mentions),
            "suggestion": self.suggestion.to_dict() if self.suggestion else None,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Message":
        sugg = data.get("suggestion")
        return cls(
            message_id=data["message_id"],
            author=tuple(data["author"]),
            body=data["body"],
            mentions=list(data.get("mentions", [])),
            suggestion=SuggestionPayload.from_dict(sugg) if sugg else None,
            timestamp=data.get("timestamp", 0.0),
        )


@dataclass
class CommentThread:
    thread_id: str
    annotation_id: str
    messages: list[Message] = field(default_factory=list)
    resolved: bool = False

    def to_dict(self) -> dict:
        return {
            "thread_id": self.thread_id,
            "annotation_id": self.annotation_id,
            "messages": [m.to_dict() for m in self.messages],
            "resolved": self.resolved,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CommentThread":
        return cls(
            thread_id=data["thread_id"],
            annotation_id=data["annotation_id"],
            messages=[Message.from_dict(m) for m in data.get("messages", [])],
            resolved=data.get("resolved", False),
        )


def strip_filler(text: str) -> str:
    """Drop a leading conversational opener ("Sure, here's a draft: ...")."""
    return _FILLER.sub("", text, count=1)


class CommentEngine:
    def __init__(self, doc: ReplicatedDocument, registry, ids, clock, members):
        self.doc = doc
        self.registry = registry
        self.ids = ids
        self.clock = clock
        self.members = members  # callable -> set of user ids
        self.threads: dict[str, CommentThread] = {}
        self.discarded: list[dict] = []  # replies dropped on resolved threads

    # ------------------------------------------------------------------
    # Posting
    # ------------------------------------------------------------------

    def parse_mentions(self, body: str) -> tuple[list[str], list[str]]:
        """Known (agent_handles, user_ids) mentioned in a body, in order."""
        agent_handles: list[str] = []
        user_ids: list[str] = []
        members = {m.lower(): m for m in self.members()}
        for token in _MENTION.findall(body):
            agent = self.registry.by_handle(token)
            if agent is not None:
                if agent.handle not in agent_handles:
                    agent_handles.append(agent.handle)
            elif token.lower() in members:
                uid = members[token.lower()]
                if uid not in user_ids:
                    user_ids.append(uid)
            # unknown tokens stay plain text
        return agent_handles, user_ids

    def post_comment(
        self,
        author: str,
        body: str,
        anchor: TextAnchor | None = None,
        thread_id: str | None = None,
        author_kind: str = "user",
    ) -> tuple[CommentThread, Message, list[str]]:
        """Store a message; returns the thread, the message, and the agent
        handles whose reply jobs the caller should enqueue."""
        if author_kind == "user" and author not in self.members():
            raise ValidationError(f"{author} is not a member of this document")
        if thread_id is not None:
            thread = self._thread(thread_id)
            if thread.resolved:
                raise ThreadResolvedError(f"thread {thread_id} is resolved")
        else:
            if anchor is None:
                raise ValidationError("a new thread needs an anchor")
            thread = CommentThread(thread_id=self.ids.next("th"), annotation_id="")
            annotation = self.doc.create_annotation(
                self.ids.next("ann"), anchor, thread.thread_id, (author_kind, author)
            )
            thread.annotation_id = annotation.annotation_id
            self.threads[thread.thread_id] = thread
        agent_handles, user_ids = self.parse_mentions(body)
        message = Message(
            message_id=self.ids.next("m"),
            author=(author_kind, author),
            body=body,
            mentions=agent_handles + user_ids,
            timestamp=self.clock.now(),
        )
        thread.messages.append(message)
        # Loop guard: agent-authored messages never fan out further jobs.
        jobs = agent_handles if author_kind == "user" else []
        return thread, message, jobs

    def system_note(self, thread_id: str, text: str) -> Message:
        """Service-authored note; allowed even on resolved threads."""
        thread = self._thread(thread_id)
        message = Message(
            message_id=self.ids.next("m"),
            author=("system", "system"),
            body=text,
            timestamp=self.clock.now(),
        )
        thread.messages.append(message)
        return message

    # ------------------------------------------------------------------
    # Agent replies
    # ------------------------------------------------------------------

    def build_agent_prompt(self, thread_id: str, handle: str, ask_message_id: str) -> list[dict]:
        """Conversation for one agent turn: its init message plus the shared
        opening (document text, goal, selected text, prior history, ask)."""
        thread = self._thread(thread_id)
        agent = self.registry.by_handle(handle)
        if agent is None:
            raise ValidationError(f"unknown agent handle {handle}")
        annotation = self.doc.annotations[thread.annotation_id]
        ask = ""
        history: list[tuple[str, str]] = []
        for m in thread.messages:
            if m.message_id == ask_message_id:
                ask = m.body
                continue
            label = f"@{m.author[1]}" if m.author[0] == "agent" else m.author[1]
            history.append((label, m.body))
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
            selected_text=self.doc.anchor_text(annotation.anchor),
            history=history,
            ask=ask,
        )
        return init + [{"role": "user", "content": opening}]

    def store_agent_reply(self, thread_id: str, handle: str, text: str) -> Message | None:
        """Append the agent's reply with its suggestion payload. Returns None
        (and logs) when the thread was resolved while the model was working."""
        thread = self._thread(thread_id)
        agent = self.registry.by_handle(handle)
        if agent is None:
            raise ValidationError(f"unknown agent handle {handle}")
        if thread.resolved:
            self.discarded.append({"thread_id": thread_id, "agent": handle, "body": text})
            log.info("discarding agent reply to resolved thread %s", thread_id)
            return None
        if agent.strip_filler:
            text = strip_filler(text)
        mentions, _ = self.parse_mentions(text)
        message = Message(
            message_id=self.ids.next("m"),
            author=("agent", handle),
            body=text,
            mentions=mentions,
            suggestion=SuggestionPayload(proposed_text=text, source_agent=handle),
            timestamp=self.clock.now(),
        )
        thread.messages.append(message)
        return message

    def agent_failure_note(self, thread_id: str) -> Message:
        return self.system_note(thread_id, "agent unavailable")

    def open_agent_thread(self, anchor: TextAnchor, handle: str, text: str) -> tuple[CommentThread, Message]:
        """New annotated thread whose first message is an agent suggestion
        (the task pipeline's integration step)."""
        agent = self.registry.by_handle(handle)
        if agent is None:
            raise ValidationError(f"unknown agent handle {handle}")
        if agent.strip_filler:
            text = strip_filler(text)
        thread = CommentThread(thread_id=self.ids.next("th"), annotation_id="")
        annotation = self.doc.create_annotation(
            self.ids.next("ann"), anchor, thread.thread_id, ("agent", handle)
        )
        thread.annotation_id = annotation.annotation_id
        self.threads[thread.thread_id] = thread
        message = Message(
            message_id=self.ids.next("m"),
            author=("agent", handle),
            body=text,
            suggestion=SuggestionPayload(proposed_text=text, source_agent=handle),
            timestamp=self.clock.now(),
        )
        thread.messages.append(message)
        return thread, message

    # ------------------------------------------------------------------
    # Consuming suggestions
    # ------------------------------------------------------------------

    def consume_suggestion(self, thread_id: str, message_id: str, action: str, acting_user: str):
        """Append/replace stage the text; copy only marks consumption.
        Returns the staging ops (empty for copy) for broadcast."""
        thread = self._thread(thread_id)
        message = self._message(thread, message_id)
        suggestion = message.suggestion
        if suggestion is None:
            raise ValidationError(f"message {message_id} carries no suggestion")
        if suggestion.consumed_by is not None:
            raise AlreadyConsumedError(suggestion.consumed_by, suggestion.consumed_by_user or "")
        if action == "copy":
            suggestion.consumed_by = "copy"
            suggestion.consumed_by_user = acting_user
            return []
        if action not in ("append", "replace"):
            raise ValidationError(f"unknown consume action {action!r}")
        annotation = self.doc.annotations[thread.annotation_id]
        if annotation.state != OPEN:
            raise AnnotationClosedError(f"annotation {annotation.annotation_id} is {annotation.state}")
        if action == "replace" and not annotation.anchor.empty:
            lo, hi = self.doc.resolve_anchor(annotation.anchor)
            if lo == hi:
                raise SpanVanishedError("span vanished; the anchored text was deleted")
        ops = self.doc.stage_suggestion(annotation.annotation_id, suggestion.proposed_text, action)
        suggestion.consumed_by = action
        suggestion.consumed_by_user = acting_user
        return ops

    def preview_side_by_side(self, thread_id: str, message_id: str) -> dict:
        thread = self._thread(thread_id)
        message = self._message(thread, message_id)
        if message.suggestion is None:
            raise ValidationError(f"message {message_id} carries no suggestion")
        annotation = self.doc.annotations[thread.annotation_id]
        return {
            "original": self.doc.anchor_text(annotation.anchor),
            "proposed": message.suggestion.proposed_text,
        }

    # ------------------------------------------------------------------
    # Resolution and lookup
    # ------------------------------------------------------------------

    def resolve_thread(self, thread_id: str) -> CommentThread:
        thread = self._thread(thread_id)
        thread.resolved = True
        return thread

    def thread_for_annotation(self, annotation_id: str) -> CommentThread | None:
        for t in self.threads.values():
            if t.annotation_id == annotation_id:
                return t
        return None

    def _thread(self, thread_id: str) -> CommentThread:
        try:
            return self.threads[thread_id]
        except KeyError:
            raise UnknownThreadError(f"unknown thread {thread_id}") from None

    def _message(self, thread: CommentThread, message_id: str) -> Message:
        for m in thread.messages:
            if m.message_id == message_id:
                return m
        raise ValidationError(f"no message {message_id} in thread {thread.thread_id}")

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"threads": [t.to_dict() for t in self.threads.values()]}

    def restore(self, data: dict) -> None:
        self.threads = {}
        for raw in data.get("threads", []):
            thread = CommentThread.from_dict(raw)
            self.threads[thread.thread_id] = thread
