"""Consultation sessions: a small state machine plus an ordered message relay.

A session links exactly two participants.  It starts Requested, becomes
Active when the counterpart accepts, and ends Terminated when either side
hangs up.  Messages are relayed verbatim and totally ordered per session;
readers catch up with a cursor and may long-poll for the next event.

The legal state transitions live in TRANSITIONS as plain data so tests can
sweep every (state, operation) pair against the same table the code uses.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

from .clock import Clock
from .errors import (
    Conflict,
    Forbidden,
    InvalidTransition,
    NotFound,
    PayloadTooLarge,
    SessionClosed,
    SessionNotActive,
)
from .store import EmrStore

STREAM_KIND = "sessions"


class SessionMode(str, Enum):
    PATIENT_PHYSICIAN = "patient_physician"
    PHYSICIAN_PHYSICIAN = "physician_physician"

    @classmethod
    def parse(cls, raw: str) -> "SessionMode":
        try:
            return cls(raw)
        except ValueError:
            raise Conflict(f"unknown session mode: {raw!r}") from None


class SessionState(str, Enum):
    REQUESTED = "requested"
    ACTIVE = "active"
    TERMINATED = "terminated"


class MessageKind(str, Enum):
    TEXT = "text"
    IMAGE_REF = "image_ref"
    AV_SIGNAL = "av_signal"

    @classmethod
    def parse(cls, raw: str) -> "MessageKind":
        try:
            return cls(raw)
        except ValueError:
            raise Conflict(f"unknown message kind: {raw!r}") from None


# (state, operation) -> resulting state for mutating operations.  A pair
# absent from this table is illegal; the error type depends on the state
# (posting before accept vs. after termination are distinct conditions).
TRANSITIONS = {
    (SessionState.REQUESTED, "accept"): SessionState.ACTIVE,
    (SessionState.REQUESTED, "terminate"): SessionState.TERMINATED,
    (SessionState.ACTIVE, "post"): SessionState.ACTIVE,
    (SessionState.ACTIVE, "terminate"): SessionState.TERMINATED,
}

# Read-only operations permitted in every state.
ALWAYS_ALLOWED = ("fetch",)


def transition(state: SessionState, operation: str) -> SessionState:
    """Resolve one mutating operation against TRANSITIONS or raise."""
    nxt = TRANSITIONS.get((state, operation))
    if nxt is not None:
        return nxt
    if operation == "post":
        if state is SessionState.REQUESTED:
            raise SessionNotActive("session not yet accepted")
        raise SessionClosed("session already terminated")
    raise InvalidTransition(f"cannot {operation} a {state.value} session")


@dataclass(frozen=True)
class SessionMessage:
    session_id: str
    seq: int
    sender: str
    kind: MessageKind
    payload: str
    sent_at: datetime

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "seq": self.seq,
            "sender": self.sender,
            "kind": self.kind.value,
            "payload": self.payload,
            "sent_at": self.sent_at.isoformat(),
        }


@dataclass
class ConsultSession:
    session_id: str
    mode: SessionMode
    initiator: str
    responder: str
    state: SessionState
    created_at: datetime
    activated_at: Optional[datetime] = None
    terminated_at: Optional[datetime] = None
    terminated_by: Optional[str] = None
    messages: list = field(default_factory=list)

    def participants(self) -> tuple:
        return (self.initiator, self.responder)

    def summary(self) -> dict:
        return {
            "session_id": self.session_id,
            "mode": self.mode.value,
            "initiator": self.initiator,
            "responder": self.responder,
            "state": self.state.value,
            "created_at": self.created_at.isoformat(),
            "activated_at": self.activated_at.isoformat() if self.activated_at else None,
            "terminated_at": self.terminated_at.isoformat() if self.terminated_at else None,
            "terminated_by": self.terminated_by,
            "message_count": len(self.messages),
        }


def check_mode(mode: SessionMode, initiator_role: str, responder_role: str) -> None:
    """Validate the participant role pair against the requested mode.

    patient_physician pairs one patient with one medical expert (either may
    initiate); physician_physician pairs two medical experts.  Any other
    combination is rejected.
    """
    roles = {initiator_role, responder_role}
    if mode is SessionMode.PATIENT_PHYSICIAN:
        if roles != {"patient", "medical_expert"}:
            raise Forbidden("patient_physician requires one patient and one medical expert")
    else:
        if roles != {"medical_expert"}:
            raise Forbidden("physician_physician requires two medical experts")


class SessionManager:
    """Owns all sessions: lifecycle, relay ordering, persistence, long-poll.

    Every state change is appended to the per-session event stream before
    it becomes visible to readers; replaying that stream reconstructs the
    session exactly, which is how recovery works.
    """

    def __init__(self, store: EmrStore, clock: Clock, *,
                 max_payload_bytes: int = 64 * 1024,
                 long_poll_max_s: float = 30.0):
        self._store = store
        self._clock = clock
        self._max_payload = max_payload_bytes
        self._long_poll_max = long_poll_max_s
        self._lock = threading.Lock()
        self._cond = threading.Condition(self._lock)
        self._sessions: dict = {}
        self._counter = 0
        self._recover()

    # -- persistence ---------------------------------------------------

    def _recover(self) -> None:
        for sid in self._store.list_streams(STREAM_KIND):
            sess = None
            for payload in self._store.stream(STREAM_KIND, sid).read():
                sess = self._apply_event(sess, payload)
            if sess is not None:
                self._sessions[sess.session_id] = sess
                # session ids are CS-<n>; keep the counter ahead of them
                try:
                    self._counter = max(self._counter, int(sess.session_id.split("-")[1]))
                except (IndexError, ValueError):
                    pass

    @staticmethod
    def _apply_event(sess, ev: dict):
        typ = ev["type"]
        if typ == "opened":
            return ConsultSession(
                session_id=ev["session_id"],
                mode=SessionMode(ev["mode"]),
                initiator=ev["initiator"],
                responder=ev["responder"],
                state=SessionState.REQUESTED,
                created_at=datetime.fromisoformat(ev["at"]),
            )
        if sess is None:
            raise ValueError("session stream does not start with an opened event")
        if typ == "accepted":
            sess.state = SessionState.ACTIVE
            sess.activated_at = datetime.fromisoformat(ev["at"])
        elif typ == "message":
            sess.messages.append(SessionMessage(
                session_id=sess.session_id,
                seq=ev["seq"],
                sender=ev["sender"],
                kind=MessageKind(ev["kind"]),
                payload=ev["payload"],
                sent_at=datetime.fromisoformat(ev["at"]),
            ))
        elif typ == "terminated":
            sess.state = SessionState.TERMINATED
            sess.terminated_at = datetime.fromisoformat(ev["at"])
            sess.terminated_by = ev["by"]
        return sess

    def _append(self, session_id: str, event: dict) -> None:
        self._store.stream(STREAM_KIND, session_id).append(event)

    # -- helpers -------------------------------------------------------

    def _get(self, session_id: str) -> ConsultSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise NotFound(f"no such session: {session_id}") from None

    def _require_participant(self, sess: ConsultSession, caller: str) -> None:
        if caller not in sess.participants():
            raise Forbidden("not a participant of this session")

    # -- operations ----------------------------------------------------

    def open(self, initiator_id: str, initiator_role: str,
             responder_id: str, responder_role: str,
             mode: SessionMode) -> ConsultSession:
        check_mode(mode, initiator_role, responder_role)
        if initiator_id == responder_id:
            raise Conflict("cannot open a session with yourself")
        now = self._clock.now()
        with self._cond:
            self._counter += 1
            sid = f"CS-{self._counter:06d}"
            sess = ConsultSession(
                session_id=sid, mode=mode,
                initiator=initiator_id, responder=responder_id,
                state=SessionState.REQUESTED, created_at=now,
            )
            self._append(sid, {
                "type": "opened", "session_id": sid, "mode": mode.value,
                "initiator": initiator_id, "responder": responder_id,
                "at": now.isoformat(),
            })
            self._sessions[sid] = sess
            self._cond.notify_all()
            return sess

    def accept(self, caller_id: str, session_id: str) -> ConsultSession:
        with self._cond:
            sess = self._get(session_id)
            self._require_participant(sess, caller_id)
            if caller_id != sess.responder:
                raise Forbidden("only the invited party may accept")
            sess.state = transition(sess.state, "accept")
            now = self._clock.now()
            sess.activated_at = now
            self._append(session_id, {"type": "accepted", "by": caller_id,
                                      "at": now.isoformat()})
            self._cond.notify_all()
            return sess

    def post(self, caller_id: str, session_id: str,
             kind: MessageKind, payload: str) -> SessionMessage:
        if not isinstance(payload, str):
            raise Conflict("payload must be a string")
        if len(payload.encode("utf-8")) > self._max_payload:
            raise PayloadTooLarge(
                f"payload exceeds {self._max_payload} bytes")
        with self._cond:
            sess = self._get(session_id)
            self._require_participant(sess, caller_id)
            transition(sess.state, "post")  # raises unless Active
            now = self._clock.now()
            msg = SessionMessage(
                session_id=session_id,
                seq=len(sess.messages),
                sender=caller_id,
                kind=kind,
                payload=payload,
                sent_at=now,
            )
            self._append(session_id, {
                "type": "message", "seq": msg.seq, "sender": caller_id,
                "kind": kind.value, "payload": payload, "at": now.isoformat(),
            })
            sess.messages.append(msg)
            self._cond.notify_all()
            return msg

    def terminate(self, caller_id: str, session_id: str) -> ConsultSession:
        with self._cond:
            sess = self._get(session_id)
            self._require_participant(sess, caller_id)
            sess.state = transition(sess.state, "terminate")
            now = self._clock.now()
            sess.terminated_at = now
            sess.terminated_by = caller_id
            self._append(session_id, {"type": "terminated", "by": caller_id,
                                      "at": now.isoformat()})
            self._cond.notify_all()
            return sess

    def fetch(self, caller_id: str, session_id: str, *,
              after: int = -1, wait_s: float = 0.0) -> dict:
        """Return messages with seq > after, blocking up to wait_s for news.

        The wait also wakes on state changes so a client blocked on an idle
        session learns promptly that it was accepted or terminated.  The
        deadline runs on real time: even under a simulated clock a blocked
        reader must wake when a writer thread posts.
        """
        wait_s = max(0.0, min(wait_s, self._long_poll_max))
        deadline = time.monotonic() + wait_s
        with self._cond:
            sess = self._get(session_id)
            self._require_participant(sess, caller_id)
            state_then = sess.state
            while True:
                fresh = [m for m in sess.messages if m.seq > after]
                if fresh or sess.state != state_then or wait_s == 0.0:
                    break
                remaining = deadline - time.monotonic()
                if remaining <= 0:
                    break
                self._cond.wait(timeout=min(remaining, 0.5))
            return {
                "session": sess.summary(),
                "messages": [m.to_dict() for m in fresh],
                "next_after": fresh[-1].seq if fresh else after,
            }

    def sessions_for(self, principal_id: str) -> list:
        with self._lock:
            out = [s.summary() for s in self._sessions.values()
                   if principal_id in s.participants()]
        out.sort(key=lambda s: s["session_id"])
        return out
