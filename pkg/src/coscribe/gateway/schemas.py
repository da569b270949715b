"""Response parsing and validation per integration point.

Everything handed to business logic has passed through here: JSON decoding,
required fields, and numeric ranges. Contract checks that have their own
fallback semantics (e.g. the exactly-three rule for CV suggestions) live
with their owning module instead.
"""

from __future__ import annotations

import json
import re

from ..errors import SchemaParseError
from . import templates

_FENCE = re.compile(r"^```[a-zA-Z]*\n(.*)\n```$", re.DOTALL)


def _strip_fences(raw: str) -> str:
    raw = raw.strip()
    m = _FENCE.match(raw)
    return m.group(1).strip() if m else raw


def _load_json(raw: str):
    try:
        return json.loads(_strip_fences(raw))
    except (json.JSONDecodeError, TypeError) as e:
        raise SchemaParseError(f"not valid JSON: {e}") from None


def _confidence(value, where: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise SchemaParseError(f"{where}: confidence_rate must be a number")
    rate = float(value)
    if not 0.0 <= rate <= 1.0:
        raise SchemaParseError(f"{where}: confidence_rate {rate} outside [0, 1]")
    return rate


def parse_suggestions(raw: str) -> list[str]:
    value = _load_json(raw)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        raise SchemaParseError("expected a JSON list of strings")
    return value


def parse_assignee(raw: str) -> dict:
    value = _load_json(raw)
    if not isinstance(value, dict):
        raise SchemaParseError("expected a JSON object")
    agent_id = value.get("agent_id")
    if not isinstance(agent_id, str) or not agent_id:
        raise SchemaParseError("agent_id must be a non-empty string")
    return {"agent_id": agent_id, "confidence_rate": _confidence(value.get("confidence_rate"), "assignee")}


def parse_segments(raw: str) -> list[dict]:
    value = _load_json(raw)
    if not isinstance(value, list):
        raise SchemaParseError("expected a JSON array of segment objects")
    out = []
    for i, item in enumerate(value):
        if not isinstance(item, dict):
            raise SchemaParseError(f"segment {i} is not an object")
        seg = {}
        for key in ("selected_text", "selected_text_sentence", "reason"):
            v = item.get(key)
            if not isinstance(v, str):
                raise SchemaParseError(f"segment {i}: {key} must be a string")
            seg[key] = v
        seg["confidence_rate"] = _confidence(item.get("confidence_rate"), f"segment {i}")
        out.append(seg)
    return out


def parse_text(raw: str) -> str:
    if not isinstance(raw, str):
        raise SchemaParseError("expected a text response")
    return raw


PARSERS = {
    templates.AGENT_INIT: parse_text,
    templates.CV_SUGGESTIONS: parse_suggestions,
    templates.SUMMARY: lambda raw: parse_text(raw).strip(),
    templates.TASK_TITLE: lambda raw: parse_text(raw).strip().strip('"'),
    templates.ASSIGNEE_SELECT: parse_assignee,
    templates.SEGMENT_SELECT: parse_segments,
}

FORMAT_REMINDERS = {
    templates.AGENT_INIT: "Reminder: reply with plain text only.",
    templates.CV_SUGGESTIONS: 'Reminder: return only a JSON list of strings, e.g. ["A", "B", "C"], or [].',
    templates.SUMMARY: "Reminder: return exactly one summary string, nothing else.",
    templates.TASK_TITLE: "Reminder: return only the title text, nothing else.",
    templates.ASSIGNEE_SELECT: 'Reminder: return only a JSON object like {"agent_id": "...", "confidence_rate": 0.0}.',
    templates.SEGMENT_SELECT: "Reminder: return only a JSON array of objects with selected_text, selected_text_sentence, reason, confidence_rate.",
}


def parse(template_id: str, raw: str):
    try:
        parser = PARSERS[template_id]
    except KeyError:
        raise SchemaParseError(f"no schema for template {template_id!r}") from None
    return parser(raw)
