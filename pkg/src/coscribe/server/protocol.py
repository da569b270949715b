"""Wire message schema helpers for the session layer.

Every broadcast uses the envelope
{"kind", "doc", "sender": {"type", "id"}, "seq", "payload"}; this module
validates client-sent frames before they reach the document owner.
"""

from __future__ import annotations

from ..errors import ProtocolViolation

MESSAGE_KINDS = (
    "join",
    "leave",
    "edit_update",
    "presence",
    "comment_event",
    "task_event",
    "agent_typing",
    "save",
    "error",
)

CLIENT_KINDS = ("edit_update", "presence")


def validate_client_frame(data: object) -> dict:
    if not isinstance(data, dict):
        raise ProtocolViolation("frame must be a JSON object")
    kind = data.get("kind")
    if kind not in CLIENT_KINDS:
        raise ProtocolViolation(f"clients may not send kind {kind!r}")
    if kind == "edit_update":
        payload = data.get("payload")
        if not isinstance(payload, dict) or not isinstance(payload.get("ops"), list):
            raise ProtocolViolation("edit_update payload needs an ops list")
        if not isinstance(data.get("seq"), int):
            raise ProtocolViolation("edit_update needs an integer seq")
    return data


def error_message(doc_id: str, reason: str, seq: int = 0) -> dict:
    return {
        "kind": "error",
        "doc": doc_id,
        "sender": {"type": "user", "id": "server"},
        "seq": seq,
        "payload": {"reason": reason},
    }
