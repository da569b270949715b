"""Hand-tracked anchor oracle.

Replays edits on a plain list of (id, char, deleted) rows and locates spans
by identifier, independently of the tree the sequence implementation keeps.
An insert at visible offset k splices immediately after the (k-1)-th visible
row; deletes only mark rows. Anchor resolution counts visible rows around
the span endpoints.
"""

from __future__ import annotations


class ShadowText:
    def __init__(self):
        self.rows: list[list] = []  # [id, char, deleted]

    def insert(self, offset: int, ids_chars: list[tuple]) -> None:
        visible = [i for i, row in enumerate(self.rows) if not row[2]]
        splice_at = visible[offset - 1] + 1 if offset > 0 else 0
        self.rows[splice_at:splice_at] = [[eid, ch, False] for eid, ch in ids_chars]

    def delete(self, offset: int, length: int) -> None:
        visible = [i for i, row in enumerate(self.rows) if not row[2]]
        for i in visible[offset:offset + length]:
            self.rows[i][2] = True

    @property
    def text(self) -> str:
        return "".join(row[1] for row in self.rows if not row[2])

    def resolve(self, start_id, end_id) -> tuple[int, int]:
        index = {row[0]: i for i, row in enumerate(self.rows)}
        i0, i1 = index[start_id], index[end_id]
        lo = sum(1 for row in self.rows[:i0] if not row[2])
        in_span = sum(1 for row in self.rows[i0:i1 + 1] if not row[2])
        return lo, lo + in_span

    def span_text(self, start_id, end_id) -> str:
        index = {row[0]: i for i, row in enumerate(self.rows)}
        i0, i1 = index[start_id], index[end_id]
        return "".join(row[1] for row in self.rows[i0:i1 + 1] if not row[2])
