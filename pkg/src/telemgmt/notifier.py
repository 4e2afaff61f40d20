"""Alert records and their delivery to staff through pluggable sinks.

An alert is raised the moment an out-of-bounds reading is accepted and
stays Open until a staff member acknowledges it.  Delivery is asynchronous:
a worker thread drains a queue, writes one attempt record per try, retries
with bounded backoff, and never produces a second Delivered record for the
same (alert, recipient, sink) key, across restarts included, because the
delivered-key set is rebuilt from the persisted attempt log.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, replace
from datetime import datetime
from typing import Callable, Optional

import httpx

from .clock import Clock
from .errors import InvalidTransition
from .store import EmrStore
from .vitals import Status, VitalKind

log = logging.getLogger(__name__)

STREAM_KIND = "notifications"
STREAM_ID = "all"

ALERT_OPEN = "open"
ALERT_ACKNOWLEDGED = "acknowledged"


@dataclass(frozen=True)
class Alert:
    alert_id: str
    patient_id: str
    device_id: str
    kind: VitalKind
    value: int
    seq: int
    status: Status
    bound_crossed: int
    low: int
    high: int
    unit: str
    policy_version: int
    taken_at: datetime
    raised_at: datetime
    state: str = ALERT_OPEN
    acknowledged_by: Optional[str] = None
    acknowledged_at: Optional[datetime] = None

    def to_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "patient_id": self.patient_id,
            "device_id": self.device_id,
            "kind": self.kind.value,
            "value": self.value,
            "seq": self.seq,
            "status": self.status.value,
            "bound_crossed": self.bound_crossed,
            "low": self.low,
            "high": self.high,
            "unit": self.unit,
            "policy_version": self.policy_version,
            "taken_at": self.taken_at.isoformat(),
            "raised_at": self.raised_at.isoformat(),
            "state": self.state,
            "acknowledged_by": self.acknowledged_by,
            "acknowledged_at": (self.acknowledged_at.isoformat()
                                if self.acknowledged_at else None),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Alert":
        return cls(
            alert_id=d["alert_id"],
            patient_id=d["patient_id"],
            device_id=d["device_id"],
            kind=VitalKind(d["kind"]),
            value=d["value"],
            seq=d["seq"],
            status=Status(d["status"]),
            bound_crossed=d["bound_crossed"],
            low=d["low"],
            high=d["high"],
            unit=d["unit"],
            policy_version=d["policy_version"],
            taken_at=datetime.fromisoformat(d["taken_at"]),
            raised_at=datetime.fromisoformat(d["raised_at"]),
            state=d.get("state", ALERT_OPEN),
            acknowledged_by=d.get("acknowledged_by"),
            acknowledged_at=(datetime.fromisoformat(d["acknowledged_at"])
                             if d.get("acknowledged_at") else None),
        )


def acknowledge(alert: Alert, by: str, at: datetime) -> Alert:
    """Open -> Acknowledged; acknowledging twice is an invalid transition."""
    if alert.state != ALERT_OPEN:
        raise InvalidTransition(f"alert {alert.alert_id} already acknowledged")
    return replace(alert, state=ALERT_ACKNOWLEDGED, acknowledged_by=by,
                   acknowledged_at=at)


def format_alert_message(alert: Alert) -> str:
    """The frozen one-line notification text.

    Contains everything a recipient needs without a console: patient,
    vital kind, measured value with unit, direction, and the bound crossed.
    """
    direction = "above" if alert.status is Status.ABOVE_HIGH else "below"
    return (f"ALERT {alert.alert_id} patient={alert.patient_id} "
            f"{alert.kind.value}={alert.value} {alert.unit} "
            f"{direction} bound {alert.bound_crossed} "
            f"at {alert.taken_at.isoformat()}")


class DeliveryFailed(Exception):
    pass


class Sink:
    name = "sink"

    def deliver(self, recipient: str, message: str, alert: Alert) -> None:
        raise NotImplementedError


class ConsoleSink(Sink):
    name = "console"

    def deliver(self, recipient: str, message: str, alert: Alert) -> None:
        log.info("notify %s: %s", recipient, message)


class SmsSimSink(Sink):
    """Simulated SMS gateway: appends one tab-separated line per message."""

    name = "sms_sim"

    def __init__(self, outbox_path, clock: Clock):
        self.path = str(outbox_path)
        self._clock = clock
        self._lock = threading.Lock()

    def deliver(self, recipient: str, message: str, alert: Alert) -> None:
        line = f"{self._clock.now().isoformat()}\t{recipient}\t{message}\n"
        with self._lock, open(self.path, "a", encoding="utf-8") as fh:
            fh.write(line)

    def lines(self) -> list:
        try:
            with open(self.path, encoding="utf-8") as fh:
                return [ln.rstrip("\n") for ln in fh if ln.strip()]
        except FileNotFoundError:
            return []


class WebhookSink(Sink):
    name = "webhook"

    def __init__(self, url: str, http: Optional[httpx.Client] = None,
                 timeout: float = 5.0):
        self.url = url
        self._http = http or httpx.Client(timeout=timeout)

    def deliver(self, recipient: str, message: str, alert: Alert) -> None:
        try:
            resp = self._http.post(self.url, json={
                "recipient": recipient,
                "message": message,
                "alert": alert.to_dict(),
            })
        except httpx.HTTPError as exc:
            raise DeliveryFailed(str(exc)) from exc
        if resp.status_code // 100 != 2:
            raise DeliveryFailed(f"webhook returned {resp.status_code}")


@dataclass(frozen=True)
class NotificationRecord:
    alert_id: str
    recipient: str
    sink: str
    attempt: int
    outcome: str  # "delivered" | "failed"
    detail: str
    at: datetime

    def to_dict(self) -> dict:
        return {
            "alert_id": self.alert_id,
            "recipient": self.recipient,
            "sink": self.sink,
            "attempt": self.attempt,
            "outcome": self.outcome,
            "detail": self.detail,
            "at": self.at.isoformat(),
        }


class Notifier:
    """Queue-fed dispatcher with per-attempt records and delivery dedup.

    route(alert) decides the recipient list at delivery time so staffing
    changes between raise and delivery are honoured.  All stream appends
    and delivered-set mutations happen on the worker thread; dispatch()
    only enqueues.
    """

    _STOP = object()

    def __init__(self, store: EmrStore, clock: Clock, sinks: list,
                 route: Callable[[Alert], list], *,
                 max_attempts: int = 4, backoff_s: float = 0.05,
                 backoff_factor: float = 2.0):
        if max_attempts < 1:
            raise ValueError("max_attempts must be at least 1")
        self._store = store
        self._clock = clock
        self._sinks = list(sinks)
        self._route = route
        self._max_attempts = max_attempts
        self._backoff_s = backoff_s
        self._backoff_factor = backoff_factor
        self._q: queue.Queue = queue.Queue()
        self._lock = threading.Lock()
        self._idle = threading.Condition(self._lock)
        self._pending = 0
        self._delivered: set = set()
        self._records: list = []
        self._worker: Optional[threading.Thread] = None
        self._crash_hook: Optional[Callable] = None  # test instrumentation
        self._recover()

    def _recover(self) -> None:
        for payload in self._store.stream(STREAM_KIND, STREAM_ID).read():
            rec = NotificationRecord(
                alert_id=payload["alert_id"], recipient=payload["recipient"],
                sink=payload["sink"], attempt=payload["attempt"],
                outcome=payload["outcome"], detail=payload.get("detail", ""),
                at=datetime.fromisoformat(payload["at"]),
            )
            self._records.append(rec)
            if rec.outcome == "delivered":
                self._delivered.add((rec.alert_id, rec.recipient, rec.sink))

    # -- lifecycle -----------------------------------------------------

    def start(self) -> None:
        if self._worker is None or not self._worker.is_alive():
            self._worker = threading.Thread(target=self._run, daemon=True,
                                            name="notifier-worker")
            self._worker.start()

    def stop(self) -> None:
        if self._worker is not None and self._worker.is_alive():
            self._q.put(self._STOP)
            self._worker.join(timeout=10)
        self._worker = None

    def dispatch(self, alert: Alert) -> None:
        with self._lock:
            self._pending += 1
        self._q.put(alert)
        self.start()

    def flush(self, timeout: float = 30.0) -> None:
        """Block until every dispatched alert has been fully processed."""
        deadline = time.monotonic() + timeout
        with self._idle:
            while self._pending > 0:
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    raise TimeoutError("notifier did not drain in time")
                self._idle.wait(timeout=min(remaining, 0.5))

    # -- worker --------------------------------------------------------

    def _run(self) -> None:
        while True:
            item = self._q.get()
            if item is self._STOP:
                break
            try:
                self._process(item)
            except Exception:
                log.exception("notifier worker failed on %s", item.alert_id)
            finally:
                with self._idle:
                    self._pending -= 1
                    self._idle.notify_all()

    def _record(self, rec: NotificationRecord) -> None:
        self._store.stream(STREAM_KIND, STREAM_ID).append(rec.to_dict())
        with self._lock:
            self._records.append(rec)

    def _process(self, alert: Alert) -> None:
        message = format_alert_message(alert)
        for recipient in self._route(alert):
            for sink in self._sinks:
                key = (alert.alert_id, recipient, sink.name)
                if key in self._delivered:
                    continue
                self._attempt_delivery(alert, recipient, sink, key, message)

    def _attempt_delivery(self, alert, recipient, sink, key, message) -> None:
        for attempt in range(1, self._max_attempts + 1):
            try:
                sink.deliver(recipient, message, alert)
                if self._crash_hook is not None:
                    self._crash_hook(key)
                self._record(NotificationRecord(
                    alert_id=alert.alert_id, recipient=recipient,
                    sink=sink.name, attempt=attempt, outcome="delivered",
                    detail="", at=self._clock.now()))
                self._delivered.add(key)
                return
            except Exception as exc:
                self._record(NotificationRecord(
                    alert_id=alert.alert_id, recipient=recipient,
                    sink=sink.name, attempt=attempt, outcome="failed",
                    detail=str(exc), at=self._clock.now()))
                if attempt < self._max_attempts:
                    self._clock.sleep(
                        self._backoff_s * self._backoff_factor ** (attempt - 1))
        log.warning("giving up on %s -> %s via %s after %d attempts",
                    alert.alert_id, recipient, sink.name, self._max_attempts)

    # -- queries -------------------------------------------------------

    def records(self, alert_id: Optional[str] = None) -> list:
        with self._lock:
            recs = list(self._records)
        if alert_id is not None:
            recs = [r for r in recs if r.alert_id == alert_id]
        return recs

    def delivered_keys(self) -> set:
        return set(self._delivered)
