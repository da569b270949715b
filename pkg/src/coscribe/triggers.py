"""Autonomous trigger detection over document activity.

Five conditions: a 5-minute interval job scheduled when the first user
enters the room, a 2-minute inactivity debounce reset by text or comment
updates, last-user-offline, explicit save, and a collaborative-edit counter
over distinct contributors. All timing runs on the injected clock; pending
timers are cancelled when the room empties so nothing runs unattended.
"""

from __future__ import annotations

from dataclasses import dataclass

SHORT_INTERVALS = "short_intervals"
INACTIVITY = "inactivity"
ALL_OFFLINE = "all_offline"
ON_SAVE = "on_save"
COLLABORATIVE_EDITS = "collaborative_edits"

TRIGGER_KINDS = (SHORT_INTERVALS, INACTIVITY, ALL_OFFLINE, ON_SAVE, COLLABORATIVE_EDITS)


@dataclass
class TriggerConfig:
    interval_minutes: float = 5.0
    inactivity_minutes: float = 2.0
    collab_edit_threshold: int = 2  # distinct contributors; the strict
    # more-than-two reading of the source material would be 3

    @property
    def interval_s(self) -> float:
        return self.interval_minutes * 60.0

    @property
    def inactivity_s(self) -> float:
        return self.inactivity_minutes * 60.0


class TriggerEngine:
    def __init__(self, doc, clock, config: TriggerConfig | None = None):
        self.doc = doc
        self.clock = clock
        self.config = config or TriggerConfig()
        self.interval_scheduled = False
        self.interval_next_at: float | None = None
        self.inactivity_deadline: float | None = None
        self.fired_log: list[tuple[float, str]] = []

    # ------------------------------------------------------------------

    def on_event(self, kind: str, *, prior_empty: bool = False, now_empty: bool = False, user: str | None = None) -> list[str]:
        """Feed one activity event; returns the trigger kinds that fire now.

        Event kinds: join, leave, edit, comment, save, tick. Unknown kinds
        are ignored. Elapsed deadlines are checked on every event.
        """
        now = self.clock.now()
        fired = self._elapsed_deadlines(now)
        if kind == "join":
            if prior_empty and not self.interval_scheduled:
                # Skip if a job is already scheduled.
                self.interval_scheduled = True
                self.interval_next_at = now + self.config.interval_s
        elif kind == "leave":
            if now_empty:
                fired.append(ALL_OFFLINE)
                self._cancel_timers()
        elif kind in ("edit", "comment"):
            self.inactivity_deadline = now + self.config.inactivity_s
            if kind == "edit" and len(self.doc.contributors_since_trigger) >= self.config.collab_edit_threshold:
                fired.append(COLLABORATIVE_EDITS)
                self.doc.contributors_since_trigger.clear()
        elif kind == "save":
            fired.append(ON_SAVE)
        for f in fired:
            self.fired_log.append((now, f))
        return fired

    def _elapsed_deadlines(self, now: float) -> list[str]:
        fired = []
        if self.interval_scheduled and self.interval_next_at is not None:
            while now >= self.interval_next_at:
                fired.append(SHORT_INTERVALS)
                self.interval_next_at += self.config.interval_s
        if self.inactivity_deadline is not None and now >= self.inactivity_deadline:
            fired.append(INACTIVITY)
            self.inactivity_deadline = None
        return fired

    def _cancel_timers(self) -> None:
        self.interval_scheduled = False
        self.interval_next_at = None
        self.inactivity_deadline = None

    def next_deadline(self) -> float | None:
        """Earliest pending timer, for deterministic virtual-clock driving."""
        candidates = []
        if self.interval_scheduled and self.interval_next_at is not None:
            candidates.append(self.interval_next_at)
        if self.inactivity_deadline is not None:
            candidates.append(self.inactivity_deadline)
        return min(candidates) if candidates else None
