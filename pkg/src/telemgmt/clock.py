"""Wall-clock abstraction so probes, hubs and the gateway can run against
either real time or a simulated clock.

The simulated clock compresses long evaluation runs (48 h of one-minute
probes) into milliseconds: ``sleep`` advances simulated time instantly.
All components that timestamp records or pace loops take a Clock instead
of calling ``datetime.now`` directly.
"""

from __future__ import annotations

import threading
import time as _time
from datetime import datetime, timedelta, timezone


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


class Clock:
    def now(self) -> datetime:
        raise NotImplementedError

    def sleep(self, seconds: float) -> None:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> datetime:
        return utcnow()

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            _time.sleep(seconds)


class SimClock(Clock):
    """Deterministic clock: sleep() advances time without blocking.

    Shared by every component of an in-process run so timestamps stay
    mutually consistent. advance() exists for tests that move time without
    a sleeping component (e.g. token-expiry checks).
    """

    def __init__(self, start: datetime | None = None):
        self._lock = threading.Lock()
        self._now = start if start is not None else datetime(2024, 1, 1, tzinfo=timezone.utc)

    def now(self) -> datetime:
        with self._lock:
            return self._now

    def sleep(self, seconds: float) -> None:
        self.advance(seconds)

    def advance(self, seconds: float) -> None:
        if seconds < 0:
            raise ValueError("cannot move a clock backwards")
        with self._lock:
            self._now += timedelta(seconds=seconds)
