"""Scheduled unavailability windows for resilience and reliability tests.

The HTTP layer consults ``is_down`` per request and answers 503 inside a
window; the metrics endpoint consults ``history`` so the gateway's
self-reported reliability reflects exactly the injected outages.
"""

from __future__ import annotations

import threading
from datetime import datetime, timedelta
from typing import Optional

from ..clock import Clock


class FaultInjector:
    def __init__(self, clock: Clock):
        self._clock = clock
        self._lock = threading.Lock()
        # list of [start, end]; end is None while an outage is open
        self._windows: list = []

    def schedule(self, start: datetime, end: datetime) -> None:
        if end <= start:
            raise ValueError("outage must end after it starts")
        with self._lock:
            self._windows.append([start, end])

    def schedule_in(self, delay_s: float, duration_s: float) -> None:
        start = self._clock.now() + timedelta(seconds=delay_s)
        self.schedule(start, start + timedelta(seconds=duration_s))

    def begin_outage(self) -> None:
        with self._lock:
            if any(w[1] is None for w in self._windows):
                return
            self._windows.append([self._clock.now(), None])

    def end_outage(self) -> None:
        now = self._clock.now()
        with self._lock:
            for w in self._windows:
                if w[1] is None:
                    w[1] = now

    def is_down(self, now: Optional[datetime] = None) -> bool:
        now = now or self._clock.now()
        with self._lock:
            for start, end in self._windows:
                if start <= now and (end is None or now < end):
                    return True
        return False

    def history(self, now: Optional[datetime] = None) -> list:
        """Closed (start, end) pairs; an open outage is clipped to now."""
        now = now or self._clock.now()
        out = []
        with self._lock:
            for start, end in self._windows:
                if start > now:
                    continue
                out.append((start, min(end, now) if end is not None else now))
        out.sort()
        return out
