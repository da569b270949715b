"""Injectable time source so trigger behavior is testable without waiting."""

from __future__ import annotations

import time


class Clock:
    """Monotonic clock interface; now() returns seconds as float."""

    def now(self) -> float:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.time()


class VirtualClock(Clock):
    """Manually advanced clock. Time never moves unless told to."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("clock cannot move backwards")
        self._now += seconds
        return self._now

    def set(self, t: float) -> float:
        if t < self._now:
            raise ValueError("clock cannot move backwards")
        self._now = float(t)
        return self._now
