"""Convergent character sequence with stable per-element identifiers.

Each character is an element with a globally unique id ``(replica, counter)``.
An insert names the element it was typed after (its parent; None means the
document head). Elements form a tree: children of one parent are ordered by
descending ``(counter, replica)``, and document order is a pre-order walk of
that tree. The tree shape is fixed at insert time, so the relative order of
any two elements never changes and identifiers can serve as stable anchors.
Deletes only mark tombstones; tombstones are retained for the document's
lifetime.

Counters double as a Lamport clock: a replica's counter is always larger
than any counter it has observed, which makes "insert at the head after
seeing X" sort before X as intended.
"""

from __future__ import annotations

from bisect import insort
from collections import deque
from dataclasses import dataclass

from .errors import ProtocolViolation

ElementId = tuple[str, int]


def _sort_key(e: "_Element") -> tuple[int, str]:
    return (e.id[1], e.id[0])


@dataclass(frozen=True)
class InsertOp:
    id: ElementId
    parent: ElementId | None
    char: str

    def to_wire(self) -> dict:
        return {
            "op": "insert",
            "id": list(self.id),
            "parent": list(self.parent) if self.parent else None,
            "char": self.char,
        }


@dataclass(frozen=True)
class DeleteOp:
    id: ElementId

    def to_wire(self) -> dict:
        return {"op": "delete", "id": list(self.id)}


Op = InsertOp | DeleteOp


def op_from_wire(data: dict) -> Op:
    kind = data.get("op")
    if kind == "insert":
        parent = data.get("parent")
        return InsertOp(
            id=(data["id"][0], int(data["id"][1])),
            parent=(parent[0], int(parent[1])) if parent else None,
            char=data["char"],
        )
    if kind == "delete":
        return DeleteOp(id=(data["id"][0], int(data["id"][1])))
    raise ProtocolViolation(f"unknown op kind: {kind!r}")


class _Element:
    __slots__ = ("id", "char", "deleted", "parent", "children")

    def __init__(self, eid: ElementId, char: str, parent: ElementId | None):
        self.id = eid
        self.char = char
        self.deleted = False
        self.parent = parent
        self.children: list[_Element] = []  # ascending by (counter, replica)


class SequenceCrdt:
    def __init__(self, replica_id: str):
        self.replica_id = replica_id
        self._clock = 0
        self._elements: dict[ElementId, _Element] = {}
        self._root_children: list[_Element] = []
        # ops waiting for a dependency id to arrive (out-of-order delivery)
        self._pending: dict[ElementId, list[Op]] = {}
        self._flat: list[_Element] | None = None
        self._order: dict[ElementId, int] | None = None
        self._vis_prefix: list[int] | None = None
        self._visible: list[_Element] | None = None

    # ------------------------------------------------------------------
    # Local editing
    # ------------------------------------------------------------------

    def local_insert(self, offset: int, text: str) -> list[InsertOp]:
        """Insert text at a visible offset; returns ops to broadcast."""
        visible = self._visible_elements()
        if not 0 <= offset <= len(visible):
            raise ValueError(f"insert offset {offset} out of range 0..{len(visible)}")
        parent = visible[offset - 1].id if offset > 0 else None
        return self.local_insert_after(parent, text)

    def local_insert_after(self, parent: ElementId | None, text: str) -> list[InsertOp]:
        if parent is not None and parent not in self._elements:
            raise ProtocolViolation(f"unknown parent element {parent}")
        ops: list[InsertOp] = []
        for ch in text:
            self._clock += 1
            op = InsertOp((self.replica_id, self._clock), parent, ch)
            self._apply_insert(op)
            ops.append(op)
            parent = op.id
        return ops

    def local_delete(self, offset: int, length: int) -> list[DeleteOp]:
        visible = self._visible_elements()
        if not (0 <= offset and offset + length <= len(visible)):
            raise ValueError(f"delete range {offset}+{length} out of range")
        ops = [DeleteOp(e.id) for e in visible[offset:offset + length]]
        for op in ops:
            self._apply_delete(op)
        return ops

    def delete_span_ops(self, start: ElementId, end: ElementId) -> list[DeleteOp]:
        """Delete every visible element between start and end inclusive."""
        i0, i1 = self._span_indexes(start, end)
        flat = self._flat_list()
        ops = [DeleteOp(flat[i].id) for i in range(i0, i1 + 1) if not flat[i].deleted]
        for op in ops:
            self._apply_delete(op)
        return ops

    # ------------------------------------------------------------------
    # Remote integration
    # ------------------------------------------------------------------

    def integrate(self, op: Op, strict: bool = False) -> None:
        self.integrate_all([op], strict=strict)

    def integrate_all(self, ops: list[Op], strict: bool = False) -> None:
        """Apply remote ops.

        strict=True rejects the whole batch before mutating anything if any
        op references an id the sequence has never seen (protocol violation:
        the server always holds a superset of what any client has observed).
        strict=False buffers such ops until the dependency arrives, which
        makes integration independent of delivery order.
        """
        if strict:
            batch_ids: set[ElementId] = set()
            for op in ops:
                if isinstance(op, InsertOp):
                    if op.parent is not None and op.parent not in self._elements and op.parent not in batch_ids:
                        raise ProtocolViolation(f"insert references unknown element {op.parent}")
                    batch_ids.add(op.id)
                else:
                    if op.id not in self._elements and op.id not in batch_ids:
                        raise ProtocolViolation(f"delete references unknown element {op.id}")
        work = deque(ops)
        while work:
            op = work.popleft()
            if isinstance(op, InsertOp):
                if op.id in self._elements:
                    continue  # duplicate delivery
                if op.parent is not None and op.parent not in self._elements:
                    self._pending.setdefault(op.parent, []).append(op)
                    continue
                self._apply_insert(op)
                for waiting in reversed(self._pending.pop(op.id, [])):
                    work.appendleft(waiting)
            else:
                if op.id not in self._elements:
                    self._pending.setdefault(op.id, []).append(op)
                    continue
                self._apply_delete(op)

    def _apply_insert(self, op: InsertOp) -> None:
        elem = _Element(op.id, op.char, op.parent)
        self._elements[op.id] = elem
        siblings = self._root_children if op.parent is None else self._elements[op.parent].children
        insort(siblings, elem, key=_sort_key)
        if op.id[1] > self._clock:
            self._clock = op.id[1]
        self._flat = None
        self._order = None
        self._visible = None
        self._vis_prefix = None

    def _apply_delete(self, op: DeleteOp) -> None:
        elem = self._elements[op.id]
        if not elem.deleted:
            elem.deleted = True
            self._visible = None
            self._vis_prefix = None

    @property
    def has_pending(self) -> bool:
        return bool(self._pending)

    # ------------------------------------------------------------------
    # Views
    # ------------------------------------------------------------------

    def _flat_list(self) -> list[_Element]:
        if self._flat is None:
            out: list[_Element] = []
            stack = list(self._root_children)
            while stack:
                e = stack.pop()
                out.append(e)
                if e.children:
                    stack.extend(e.children)
            self._flat = out
            self._order = {e.id: i for i, e in enumerate(out)}
        return self._flat

    def _order_index(self) -> dict[ElementId, int]:
        self._flat_list()
        assert self._order is not None
        return self._order

    def _visible_elements(self) -> list[_Element]:
        if self._visible is None:
            self._visible = [e for e in self._flat_list() if not e.deleted]
        return self._visible

    def _visible_prefix(self) -> list[int]:
        """prefix[i] = count of visible elements among flat[:i]."""
        if self._vis_prefix is None:
            flat = self._flat_list()
            pref = [0] * (len(flat) + 1)
            for i, e in enumerate(flat):
                pref[i + 1] = pref[i] + (0 if e.deleted else 1)
            self._vis_prefix = pref
        return self._vis_prefix

    @property
    def text(self) -> str:
        return "".join(e.char for e in self._visible_elements())

    def __len__(self) -> int:
        return len(self._visible_elements())

    def has_element(self, eid: ElementId) -> bool:
        return eid in self._elements

    def is_deleted(self, eid: ElementId) -> bool:
        return self._elements[eid].deleted

    def element_at(self, offset: int) -> ElementId:
        """Id of the visible element currently at a visible offset."""
        return self._visible_elements()[offset].id

    def id_span(self, start: int, end: int) -> tuple[ElementId, ElementId]:
        """Ids of the first and last element of visible range [start, end)."""
        if end <= start:
            raise ValueError("id_span requires a non-empty range")
        visible = self._visible_elements()
        return visible[start].id, visible[end - 1].id

    def _span_indexes(self, start: ElementId, end: ElementId) -> tuple[int, int]:
        order = self._order_index()
        try:
            return order[start], order[end]
        except KeyError as e:
            raise ProtocolViolation(f"unknown element {e.args[0]}") from None

    def order_range(self, start: ElementId, end: ElementId) -> tuple[int, int]:
        """Document-order indexes (tombstones included) of a span's endpoints."""
        return self._span_indexes(start, end)

    def resolve_span(self, start: ElementId, end: ElementId) -> tuple[int, int]:
        """Current visible offsets [lo, hi) of the inclusive element span."""
        i0, i1 = self._span_indexes(start, end)
        flat = self._flat_list()
        pref = self._visible_prefix()
        lo = pref[i0]
        hi = pref[i1] + (0 if flat[i1].deleted else 1)
        return lo, max(lo, hi)

    def resolve_point_after(self, fence: ElementId | None) -> int:
        """Visible offset immediately after an element (None = head)."""
        if fence is None:
            return 0
        order = self._order_index()
        if fence not in order:
            raise ProtocolViolation(f"unknown element {fence}")
        i = order[fence]
        pref = self._visible_prefix()
        return pref[i] + (0 if self._flat_list()[i].deleted else 1)

    def span_text(self, start: ElementId, end: ElementId) -> str:
        i0, i1 = self._span_indexes(start, end)
        flat = self._flat_list()
        return "".join(flat[i].char for i in range(i0, i1 + 1) if not flat[i].deleted)

    def predecessor_id(self, eid: ElementId) -> ElementId | None:
        """Element immediately before eid in document order (incl. tombstones)."""
        order = self._order_index()
        if eid not in order:
            raise ProtocolViolation(f"unknown element {eid}")
        i = order[eid]
        return self._flat_list()[i - 1].id if i > 0 else None

    # ------------------------------------------------------------------
    # Snapshot
    # ------------------------------------------------------------------

    def to_snapshot(self) -> dict:
        rows = []
        for e in self._flat_list():
            rows.append([e.id[0], e.id[1], e.char, e.deleted, list(e.parent) if e.parent else None])
        return {"replica": self.replica_id, "clock": self._clock, "elements": rows}

    @classmethod
    def from_snapshot(cls, data: dict, replica_id: str | None = None) -> "SequenceCrdt":
        seq = cls(replica_id or data["replica"])
        for row in data["elements"]:
            rep, ctr, char, deleted, parent = row
            eid = (rep, int(ctr))
            pid = (parent[0], int(parent[1])) if parent else None
            seq._apply_insert(InsertOp(eid, pid, char))
            if deleted:
                seq._apply_delete(DeleteOp(eid))
        seq._clock = max(seq._clock, int(data.get("clock", 0)))
        return seq
