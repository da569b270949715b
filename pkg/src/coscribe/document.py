"""Replicated document: body text, stable anchors, annotations, pending text.

Anchors hold the ids of the first and last character of their span
(inclusive), so an insertion exactly at a boundary falls outside the span
while an insertion strictly inside is absorbed. A caret anchor (empty span)
instead records the id of the element to its left, None meaning document
head.
"""

from __future__ import annotations

from dataclasses import dataclass

from .crdt import ElementId, Op, SequenceCrdt
from .errors import AnnotationClosedError, DanglingAnchorError, ValidationError

OPEN = "open"
APPROVED = "approved"
DELETED = "deleted"


@dataclass
class TextAnchor:
    start: ElementId | None
    end: ElementId | None
    empty: bool = False  # caret anchor: start == end == left fence
    bias: str = "outside"  # boundary insertions fall outside the span

    def to_dict(self) -> dict:
        return {
            "start": list(self.start) if self.start else None,
            "end": list(self.end) if self.end else None,
            "empty": self.empty,
            "bias": self.bias,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TextAnchor":
        def eid(v):
            return (v[0], int(v[1])) if v else None

        return cls(
            start=eid(data.get("start")),
            end=eid(data.get("end")),
            empty=bool(data.get("empty", False)),
            bias=data.get("bias", "outside"),
        )


@dataclass
class Annotation:
    annotation_id: str
    anchor: TextAnchor
    state: str
    thread_id: str
    pending_region: TextAnchor | None
    created_by: tuple[str, str]  # (kind, id) with kind "user" or "agent"

    def to_dict(self) -> dict:
        return {
            "annotation_id": self.annotation_id,
            "anchor": self.anchor.to_dict(),
            "state": self.state,
            "thread_id": self.thread_id,
            "pending_region": self.pending_region.to_dict() if self.pending_region else None,
            "created_by": list(self.created_by),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Annotation":
        pending = data.get("pending_region")
        return cls(
            annotation_id=data["annotation_id"],
            anchor=TextAnchor.from_dict(data["anchor"]),
            state=data["state"],
            thread_id=data["thread_id"],
            pending_region=TextAnchor.from_dict(pending) if pending else None,
            created_by=tuple(data["created_by"]),
        )


class ReplicatedDocument:
    def __init__(self, doc_id: str, goal_text: str = "", replica_id: str = "srv"):
        self.doc_id = doc_id
        self.goal_text = goal_text
        self.body = SequenceCrdt(replica_id)
        self.annotations: dict[str, Annotation] = {}
        self.contributors_since_trigger: set[str] = set()
        self.save_counter = 0

    # ------------------------------------------------------------------
    # Editing
    # ------------------------------------------------------------------

    def apply_edit(self, ops: list[Op], origin_user: str | None = None, strict: bool = True) -> None:
        """Integrate edit ops; human origins are tracked as contributors."""
        self.body.integrate_all(ops, strict=strict)
        if origin_user is not None:
            self.contributors_since_trigger.add(origin_user)

    @property
    def text(self) -> str:
        return self.body.text

    # ------------------------------------------------------------------
    # Anchors
    # ------------------------------------------------------------------

    def anchor_for_range(self, start: int, end: int) -> TextAnchor:
        """Anchor over visible offsets [start, end); empty range gives a caret."""
        if not (0 <= start <= end <= len(self.body)):
            raise ValidationError(f"range {start}..{end} out of bounds")
        if start == end:
            fence = self.body.element_at(start - 1) if start > 0 else None
            return TextAnchor(start=fence, end=fence, empty=True)
        s, e = self.body.id_span(start, end)
        return TextAnchor(start=s, end=e)

    def _check_anchor_ids(self, anchor: TextAnchor) -> None:
        for eid in (anchor.start, anchor.end):
            if eid is not None and not self.body.has_element(eid):
                raise DanglingAnchorError(f"dangling anchor: {eid}")

    def resolve_anchor(self, anchor: TextAnchor) -> tuple[int, int]:
        """Current visible offsets of the anchored span."""
        self._check_anchor_ids(anchor)
        if anchor.empty:
            off = self.body.resolve_point_after(anchor.start)
            return off, off
        assert anchor.start is not None and anchor.end is not None
        return self.body.resolve_span(anchor.start, anchor.end)

    def anchor_text(self, anchor: TextAnchor) -> str:
        self._check_anchor_ids(anchor)
        if anchor.empty:
            return ""
        assert anchor.start is not None and anchor.end is not None
        return self.body.span_text(anchor.start, anchor.end)

    def anchors_overlap(self, a: TextAnchor, b: TextAnchor) -> bool:
        """Two anchors overlap when they share at least one element."""
        if a.empty or b.empty:
            return False
        ia = self.body.order_range(a.start, a.end)
        ib = self.body.order_range(b.start, b.end)
        return ia[0] <= ib[1] and ib[0] <= ia[1]

    # ------------------------------------------------------------------
    # Annotations and pending text
    # ------------------------------------------------------------------

    def create_annotation(
        self,
        annotation_id: str,
        anchor: TextAnchor,
        thread_id: str,
        created_by: tuple[str, str],
    ) -> Annotation:
        self._check_anchor_ids(anchor)
        ann = Annotation(annotation_id, anchor, OPEN, thread_id, None, created_by)
        self.annotations[annotation_id] = ann
        return ann

    def overlapping_annotations(self, anchor: TextAnchor) -> list[Annotation]:
        return [
            a for a in self.annotations.values()
            if a.state != DELETED and self.anchors_overlap(a.anchor, anchor)
        ]

    def stage_suggestion(self, annotation_id: str, text: str, mode: str) -> list[Op]:
        """Insert suggestion text next to (append) or in place of (replace)
        the anchored span and mark it as the annotation's pending region.
        Returns the generated ops for broadcast."""
        ann = self._annotation(annotation_id)
        if ann.state != OPEN:
            raise AnnotationClosedError(f"annotation {annotation_id} is {ann.state}")
        if mode not in ("append", "replace"):
            raise ValidationError(f"unknown staging mode {mode!r}")
        ops: list[Op] = []
        if mode == "replace" and not ann.anchor.empty:
            assert ann.anchor.start is not None and ann.anchor.end is not None
            insert_after = self.body.predecessor_id(ann.anchor.start)
            ops.extend(self.body.delete_span_ops(ann.anchor.start, ann.anchor.end))
        elif ann.anchor.empty:
            insert_after = ann.anchor.start
        else:
            insert_after = ann.anchor.end
        if text:
            ins = self.body.local_insert_after(insert_after, text)
            ops.extend(ins)
            ann.pending_region = TextAnchor(start=ins[0].id, end=ins[-1].id)
        else:
            ann.pending_region = None
        return ops

    def approve_annotation(self, annotation_id: str) -> Annotation:
        """Finalize: clear the pending marking and close the annotation."""
        ann = self._annotation(annotation_id)
        if ann.state == APPROVED:
            return ann  # idempotent
        if ann.state == DELETED:
            raise AnnotationClosedError(f"annotation {annotation_id} is deleted")
        ann.state = APPROVED
        ann.pending_region = None
        return ann

    def close_annotation(self, annotation_id: str) -> Annotation:
        """Dismiss without approving; staged pending text stays in the body."""
        ann = self._annotation(annotation_id)
        if ann.state == OPEN:
            ann.state = DELETED
            ann.pending_region = None
        return ann

    def _annotation(self, annotation_id: str) -> Annotation:
        try:
            return self.annotations[annotation_id]
        except KeyError:
            raise ValidationError(f"unknown annotation {annotation_id}") from None

    def pending_regions(self) -> dict[str, tuple[int, int]]:
        """Current offsets of every staged, unapproved suggestion insertion."""
        out = {}
        for ann in self.annotations.values():
            if ann.pending_region is not None and ann.state == OPEN:
                out[ann.annotation_id] = self.resolve_anchor(ann.pending_region)
        return out

    # ------------------------------------------------------------------
    # Snapshot
    # ------------------------------------------------------------------

    def to_snapshot(self) -> dict:
        return {
            "format": "coscribe-document",
            "version": 1,
            "doc_id": self.doc_id,
            "goal_text": self.goal_text,
            "body": self.body.to_snapshot(),
            "annotations": [a.to_dict() for a in self.annotations.values()],
            "contributors_since_trigger": sorted(self.contributors_since_trigger),
            "save_counter": self.save_counter,
        }

    @classmethod
    def from_snapshot(cls, data: dict, replica_id: str | None = None) -> "ReplicatedDocument":
        if data.get("format") != "coscribe-document":
            raise ValidationError("not a document snapshot")
        doc = cls(data["doc_id"], data.get("goal_text", ""))
        doc.body = SequenceCrdt.from_snapshot(data["body"], replica_id=replica_id or data["body"]["replica"])
        for raw in data.get("annotations", []):
            ann = Annotation.from_dict(raw)
            doc.annotations[ann.annotation_id] = ann
        doc.contributors_since_trigger = set(data.get("contributors_since_trigger", []))
        doc.save_counter = int(data.get("save_counter", 0))
        return doc
