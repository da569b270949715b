"""Deterministic id generation.

Every id the service hands out comes from a per-prefix counter so that a
scenario replayed with the same inputs produces byte-identical state.
"""

from __future__ import annotations

import random
import string


class IdFactory:
    def __init__(self) -> None:
        self._counters: dict[str, int] = {}

    def next(self, prefix: str) -> str:
        n = self._counters.get(prefix, 0) + 1
        self._counters[prefix] = n
        return f"{prefix}{n}"

    def to_dict(self) -> dict[str, int]:
        return dict(self._counters)

    @classmethod
    def from_dict(cls, data: dict[str, int]) -> "IdFactory":
        f = cls()
        f._counters.update({k: int(v) for k, v in data.items()})
        return f


_CODE_ALPHABET = string.ascii_lowercase + string.digits


def make_join_code(rng: random.Random, length: int = 6) -> str:
    return "".join(rng.choice(_CODE_ALPHABET) for _ in range(length))
