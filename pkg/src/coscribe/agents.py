"""Shared agent profiles: creation, presets, CV suggestions, summaries.

Profiles are plain shared objects: any member may edit any profile; the
registry records creator and last editor for attribution but enforces no
ownership. Every document owns exactly one undeletable default agent.
"""

from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    GatewayError,
    HandleTakenError,
    SchemaParseError,
    SuggestionUnavailableError,
    UnknownAgentError,
    ValidationError,
)
from .gateway import templates

DEFAULT_HANDLE = "aiAuthor"
DEFAULT_NAME = "AI Author"
DEFAULT_ROLE = "General-purpose writing assistant for any document task"
DEFAULT_SUMMARY = (
    "The agent is a general-purpose writing assistant available in every "
    "document. It helps with drafting, revising, and answering questions "
    "about the text without any prior setup."
)

SEEDED_SECTIONS = ("expertise", "skills")

_SENTENCE_END = re.compile(r"[.!?]+(?=\s|$)")


def handle_for(name: str) -> str:
    handle = re.sub(r"[^A-Za-z0-9]", "", name).lower()
    if not handle:
        raise ValidationError(f"name {name!r} yields no usable handle")
    return handle


def truncate_sentences(text: str, limit: int = 5) -> str:
    """Cut after the limit-th sentence terminator; keeps shorter text intact."""
    matches = list(_SENTENCE_END.finditer(text))
    if len(matches) < limit:
        return text
    cut = matches[limit - 1].end()
    return text[:cut] if text[cut:].strip() else text


def sentence_count(text: str) -> int:
    if not text.strip():
        return 0
    matches = list(_SENTENCE_END.finditer(text))
    trailing = bool(text[matches[-1].end():].strip()) if matches else True
    return len(matches) + (1 if trailing else 0)


@dataclass
class AgentProfile:
    agent_id: str
    handle: str
    name: str
    role: str = ""
    sections: dict[str, list[str]] = field(default_factory=lambda: {s: [] for s in SEEDED_SECTIONS})
    notes: list[str] = field(default_factory=list)
    summary: str = ""
    summary_stale: bool = False
    creator: str = ""
    last_editor: str = ""
    is_default: bool = False
    strip_filler: bool = False
    version: int = 0
    summary_version: int = 0
    run_history: list[dict] = field(default_factory=list)  # {"run_id", "started_at"}

    @property
    def mention(self) -> str:
        return "@" + self.handle

    def run_ids(self) -> list[str]:
        return [r["run_id"] for r in self.run_history]

    def to_dict(self) -> dict:
        return {
            "agent_id": self.agent_id,
            "handle": self.handle,
            "name": self.name,
            "role": self.role,
            "sections": {k: list(v) for k, v in self.sections.items()},
            "notes": list(self.notes),
            "summary": self.summary,
            "summary_stale": self.summary_stale,
            "creator": self.creator,
            "last_editor": self.last_editor,
            "is_default": self.is_default,
            "strip_filler": self.strip_filler,
            "version": self.version,
            "summary_version": self.summary_version,
            "run_history": [dict(r) for r in self.run_history],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AgentProfile":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__ if k in data})


def load_presets() -> list[dict]:
    path = os.environ.get("COSCRIBE_PRESETS") or Path(__file__).parent / "agents_presets.json"
    return json.loads(Path(path).read_text())


class AgentRegistry:
    def __init__(self, gateway, ids):
        self.gateway = gateway
        self.ids = ids
        self.agents: dict[str, AgentProfile] = {}
        self._bootstrap_default()

    def _bootstrap_default(self) -> None:
        default = AgentProfile(
            agent_id=self.ids.next("a"),
            handle=DEFAULT_HANDLE,
            name=DEFAULT_NAME,
            role=DEFAULT_ROLE,
            summary=DEFAULT_SUMMARY,
            creator="system",
            is_default=True,
        )
        self.agents[default.agent_id] = default

    # ------------------------------------------------------------------
    # Lookup
    # ------------------------------------------------------------------

    def get(self, agent_id: str) -> AgentProfile:
        try:
            return self.agents[agent_id]
        except KeyError:
            raise UnknownAgentError(f"unknown agent {agent_id}") from None

    def by_handle(self, handle: str) -> AgentProfile | None:
        lowered = handle.lower()
        for a in self.agents.values():
            if a.handle.lower() == lowered:
                return a
        return None

    def default_agent(self) -> AgentProfile:
        for a in self.agents.values():
            if a.is_default:
                return a
        raise UnknownAgentError("default agent missing")

    def all(self) -> list[AgentProfile]:
        return list(self.agents.values())

    def handles(self) -> set[str]:
        return {a.handle for a in self.agents.values()}

    # ------------------------------------------------------------------
    # Creation and editing
    # ------------------------------------------------------------------

    def create(
        self,
        creator: str,
        name: str,
        role: str = "",
        sections: dict[str, list[str]] | None = None,
        notes: list[str] | None = None,
        strip_filler: bool = False,
    ) -> AgentProfile:
        if not name or not name.strip():
            raise ValidationError("agent name must not be empty")
        handle = handle_for(name)
        if self.by_handle(handle) is not None:
            raise HandleTakenError(f"handle taken: {handle}")
        merged = {s: [] for s in SEEDED_SECTIONS}
        for key, values in (sections or {}).items():
            merged[key] = list(values)
        profile = AgentProfile(
            agent_id=self.ids.next("a"),
            handle=handle,
            name=name.strip(),
            role=role,
            sections=merged,
            notes=list(notes or []),
            creator=creator,
            last_editor=creator,
            strip_filler=strip_filler,
        )
        self.agents[profile.agent_id] = profile
        self._regenerate_summary(profile)
        return profile

    def instantiate_preset(self, creator: str, preset_id: str) -> AgentProfile:
        preset = next((p for p in load_presets() if p["preset_id"] == preset_id), None)
        if preset is None:
            raise ValidationError(f"unknown preset {preset_id!r}")
        name = preset["name"]
        base = handle_for(name)
        handle = base
        n = 2
        while self.by_handle(handle) is not None:
            handle = f"{base}{n}"
            n += 1
        profile = AgentProfile(
            agent_id=self.ids.next("a"),
            handle=handle,
            name=name,
            role=preset.get("role", ""),
            sections={k: list(v) for k, v in preset.get("sections", {}).items()},
            notes=list(preset.get("notes", [])),
            creator=creator,
            last_editor=creator,
        )
        for seeded in SEEDED_SECTIONS:
            profile.sections.setdefault(seeded, [])
        self.agents[profile.agent_id] = profile
        self._regenerate_summary(profile)
        return profile

    def update(self, agent_id: str, editor: str, **fields) -> AgentProfile:
        profile = self.get(agent_id)
        allowed = {"name", "role", "sections", "notes", "strip_filler"}
        unknown = set(fields) - allowed
        if unknown:
            raise ValidationError(f"cannot update fields: {sorted(unknown)}")
        if "name" in fields and fields["name"] != profile.name:
            if not fields["name"].strip():
                raise ValidationError("agent name must not be empty")
            new_handle = handle_for(fields["name"])
            existing = self.by_handle(new_handle)
            if existing is not None and existing.agent_id != agent_id:
                raise HandleTakenError(f"handle taken: {new_handle}")
            if not profile.is_default:
                profile.handle = new_handle
            profile.name = fields["name"].strip()
        for key in ("role", "notes", "strip_filler"):
            if key in fields:
                setattr(profile, key, fields[key])
        if "sections" in fields:
            profile.sections = {k: list(v) for k, v in fields["sections"].items()}
        profile.last_editor = editor
        self._regenerate_summary(profile)
        return profile

    def delete(self, agent_id: str) -> AgentProfile:
        profile = self.get(agent_id)
        if profile.is_default:
            raise ValidationError("the default agent cannot be deleted")
        del self.agents[agent_id]
        return profile

    # ------------------------------------------------------------------
    # Model-backed features
    # ------------------------------------------------------------------

    def _regenerate_summary(self, profile: AgentProfile) -> None:
        profile.version += 1
        try:
            raw = self.gateway.request(
                templates.SUMMARY,
                {
                    "agent_role": profile.role,
                    "sections_json": templates.sections_json(profile.sections),
                    "notes": templates.notes_json(profile.notes),
                },
            )
        except (GatewayError, SchemaParseError):
            profile.summary_stale = True
            return
        profile.summary = truncate_sentences(raw, 5)
        profile.summary_stale = False
        profile.summary_version = profile.version

    def suggest_section_values(
        self, agent_id: str, section_name: str, current_suggestions: list[str]
    ) -> list[str]:
        """Exactly three compliant values or the empty list."""
        profile = self.get(agent_id)
        if section_name not in profile.sections:
            raise ValidationError(f"agent has no section {section_name!r}")
        try:
            values = self.gateway.request(
                templates.CV_SUGGESTIONS,
                {
                    "agent_role": profile.role,
                    "section_name": section_name,
                    "sections_json": templates.sections_json(profile.sections),
                    "current_suggestions": json.dumps(current_suggestions, ensure_ascii=False),
                },
            )
        except (GatewayError, SchemaParseError) as e:
            raise SuggestionUnavailableError(f"suggestion unavailable: {e}") from e
        return _compliant_triple(values, profile.sections[section_name], current_suggestions)

    def record_run(self, agent_id: str, run_id: str, started_at: float) -> None:
        profile = self.get(agent_id)
        entry = {"run_id": run_id, "started_at": started_at}
        i = len(profile.run_history)
        while i > 0 and profile.run_history[i - 1]["started_at"] > started_at:
            i -= 1
        profile.run_history.insert(i, entry)

    # ------------------------------------------------------------------
    # Persistence
    # ------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {"agents": [a.to_dict() for a in self.agents.values()]}

    def restore(self, data: dict) -> None:
        self.agents = {}
        for raw in data.get("agents", []):
            profile = AgentProfile.from_dict(raw)
            self.agents[profile.agent_id] = profile


def _compliant_triple(values: list[str], existing: list[str], current: list[str]) -> list[str]:
    if len(values) != 3:
        return []
    taken = {v.strip().lower() for v in existing} | {v.strip().lower() for v in current}
    out: list[str] = []
    seen: set[str] = set()
    for v in values:
        v = v.strip()
        if not v or len(v.split()) > 2:
            return []  # malformed batch is non-compliant as a whole
        key = v.lower()
        if key in taken or key in seen:
            continue  # duplicate: filtered out
        seen.add(key)
        out.append(v)
    return out if len(out) == 3 else []
