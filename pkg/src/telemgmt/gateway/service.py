"""Gateway core: every operation the HTTP surface exposes, minus HTTP.

All state lives in the append-only store; the in-memory indexes here
(principal cache, per-device sequence sets, alert table) are rebuilt from
it on startup, so killing the process between any two appends loses
nothing that was acknowledged.

Concurrency: one re-entrant lock serialises mutating operations.  Session
traffic has its own lock inside SessionManager so a long-polling reader
never blocks ingestion.
"""

from __future__ import annotations

import logging
import secrets as _secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime
from fractions import Fraction
from typing import Optional

from ..clock import Clock, SystemClock
from ..errors import BadRequest, Conflict, NotFound, Unauthorized
from ..notifier import Alert, Notifier, acknowledge
from ..reliability import availability, reliability as reliability_exact
from ..sessions import MessageKind, SessionManager, SessionMode
from ..store import EmrStore, ObjectNotFound
from ..vitals import (
    Bound,
    MalformedReading,
    Status,
    ThresholdPolicy,
    UnknownVitalKind,
    VitalKind,
    VitalReading,
    classify,
    default_policy,
)
from .auth import (
    Principal,
    Role,
    TokenTable,
    authorize,
    hash_secret,
    verify_secret,
)
from .faults import FaultInjector

log = logging.getLogger(__name__)

ID_PREFIX = {
    Role.PATIENT: "PAT",
    Role.MEDICAL_EXPERT: "EXP",
    Role.ADMINISTRATOR: "ADM",
}

BOOTSTRAP_ADMIN_ID = "ADM-0000"


@dataclass
class GatewayConfig:
    token_lifetime_s: float = 8 * 3600.0
    long_poll_max_s: float = 30.0
    max_payload_bytes: int = 64 * 1024
    vitals_page_limit: int = 500


@dataclass
class IngestItem:
    seq: Optional[int]
    status: str  # accepted | duplicate | out_of_order | malformed
    classification: Optional[str] = None
    alert_id: Optional[str] = None
    error: Optional[str] = None

    def to_dict(self) -> dict:
        out = {"seq": self.seq, "status": self.status}
        if self.classification is not None:
            out["classification"] = self.classification
        if self.alert_id is not None:
            out["alert_id"] = self.alert_id
        if self.error is not None:
            out["error"] = self.error
        return out


class GatewayService:
    def __init__(self, store: EmrStore, clock: Optional[Clock] = None,
                 config: Optional[GatewayConfig] = None,
                 notifier: Optional[Notifier] = None,
                 faults: Optional[FaultInjector] = None):
        self._store = store
        self._clock = clock or SystemClock()
        self._cfg = config or GatewayConfig()
        self._notifier = notifier
        self._faults = faults
        self._started_at = self._clock.now()
        self._lock = threading.RLock()

        self._principals: dict = {}
        self._names: set = set()
        self._tokens = TokenTable()
        self._counters: dict = {}
        self._policies: dict = {}
        self._seen: dict = {}      # (patient, device) -> set of seqs
        self._maxseq: dict = {}    # (patient, device) -> highest accepted seq
        self._alerts: dict = {}
        self._alert_order: list = []
        self.sessions = SessionManager(
            store, self._clock,
            max_payload_bytes=self._cfg.max_payload_bytes,
            long_poll_max_s=self._cfg.long_poll_max_s)
        self._recover()

    # ------------------------------------------------------------------
    # recovery

    def _recover(self) -> None:
        for pid in self._store.snapshot_list("principals"):
            doc, _ = self._store.snapshot_get("principals", pid)
            p = self._principal_from_doc(doc)
            self._principals[p.principal_id] = p
            self._names.add((p.role, p.name))
        try:
            doc, _ = self._store.snapshot_get("meta", "id_counters")
            self._counters = dict(doc)
        except KeyError:
            self._counters = {}
        for patient_id in self._store.list_streams("readings"):
            for rec in self._store.stream("readings", patient_id).read():
                key = (rec["patient_id"], rec["device_id"])
                self._seen.setdefault(key, set()).add(rec["seq"])
                if rec["seq"] > self._maxseq.get(key, -1):
                    self._maxseq[key] = rec["seq"]
        for ev in self._store.stream("alerts", "all").read():
            if ev["type"] == "raised":
                alert = Alert.from_dict(ev["alert"])
                self._alerts[alert.alert_id] = alert
                self._alert_order.append(alert.alert_id)
            elif ev["type"] == "acknowledged":
                old = self._alerts[ev["alert_id"]]
                self._alerts[ev["alert_id"]] = acknowledge(
                    old, ev["by"], datetime.fromisoformat(ev["at"]))

    @staticmethod
    def _principal_from_doc(doc: dict) -> Principal:
        return Principal(
            principal_id=doc["id"],
            role=Role(doc["role"]),
            name=doc["name"],
            secret_hash=doc["secret_hash"],
            created_at=datetime.fromisoformat(doc["created_at"]),
            assigned_staff=tuple(doc.get("assigned_staff", ())),
        )

    # ------------------------------------------------------------------
    # plumbing

    def _audit(self, actor: str, action: str, target: str = "",
               detail: str = "") -> None:
        self._store.stream("audit", "all").append({
            "at": self._clock.now().isoformat(),
            "actor": actor,
            "action": action,
            "target": target,
            "detail": detail,
        })

    def _principal(self, principal_id: str) -> Principal:
        p = self._principals.get(principal_id)
        if p is None:
            raise NotFound(f"no such principal: {principal_id}")
        return p

    def _persist_principal(self, p: Principal) -> None:
        self._store.snapshot_upsert("principals", p.principal_id, {
            "id": p.principal_id,
            "role": p.role.value,
            "name": p.name,
            "secret_hash": p.secret_hash,
            "created_at": p.created_at.isoformat(),
            "assigned_staff": list(p.assigned_staff),
        })

    def _next_id(self, role: Role) -> str:
        n = self._counters.get(role.value, 0) + 1
        self._counters[role.value] = n
        self._store.snapshot_upsert("meta", "id_counters", dict(self._counters))
        return f"{ID_PREFIX[role]}-{n:04d}"

    # ------------------------------------------------------------------
    # accounts and tokens

    def ensure_bootstrap_admin(self, secret: str,
                               admin_id: str = BOOTSTRAP_ADMIN_ID) -> Principal:
        """Create the initial administrator if absent; idempotent."""
        with self._lock:
            existing = self._principals.get(admin_id)
            if existing is not None:
                return existing
            p = Principal(
                principal_id=admin_id,
                role=Role.ADMINISTRATOR,
                name="bootstrap administrator",
                secret_hash=hash_secret(secret),
                created_at=self._clock.now(),
            )
            self._persist_principal(p)
            self._principals[admin_id] = p
            self._names.add((p.role, p.name))
            self._audit("system", "bootstrap_admin", admin_id)
            return p

    def register(self, actor: Principal, role: str, name: str,
                 assigned_staff: Optional[list] = None,
                 secret: Optional[str] = None) -> dict:
        authorize(actor, "register_principal")
        try:
            role_e = Role.parse(role)
        except ValueError as exc:
            raise BadRequest(str(exc)) from None
        if not name or not name.strip():
            raise BadRequest("name must be non-empty")
        staff = tuple(assigned_staff or ())
        if staff and role_e is not Role.PATIENT:
            raise BadRequest("assigned_staff applies only to patients")
        with self._lock:
            if (role_e, name) in self._names:
                raise Conflict(f"duplicate {role_e.value} name: {name!r}")
            for sid in staff:
                s = self._principals.get(sid)
                if s is None:
                    raise NotFound(f"assigned staff {sid} does not exist")
                if s.role is not Role.MEDICAL_EXPERT:
                    raise Conflict(f"assigned staff {sid} is not a medical expert")
            new_secret = secret or _secrets.token_urlsafe(12)
            p = Principal(
                principal_id=self._next_id(role_e),
                role=role_e,
                name=name,
                secret_hash=hash_secret(new_secret),
                created_at=self._clock.now(),
                assigned_staff=staff,
            )
            self._persist_principal(p)
            self._principals[p.principal_id] = p
            self._names.add((role_e, name))
            self._audit(actor.principal_id, "register", p.principal_id,
                        role_e.value)
            return {"id": p.principal_id, "role": p.role.value,
                    "name": p.name, "secret": new_secret}

    def login(self, principal_id: str, secret: str) -> dict:
        with self._lock:
            p = self._principals.get(principal_id)
            if p is None or not verify_secret(secret, p.secret_hash):
                # same error either way: no account enumeration
                raise Unauthorized("bad credentials")
            token = self._tokens.issue(principal_id, self._clock.now(),
                                       self._cfg.token_lifetime_s)
            self._audit(principal_id, "login", principal_id)
            return {
                "token": token.value,
                "expires_at": token.expires_at.isoformat(),
                "principal": p.public_dict(),
            }

    def authenticate(self, token_value: Optional[str]) -> Principal:
        if not token_value:
            raise Unauthorized("missing bearer token")
        pid = self._tokens.resolve(token_value, self._clock.now())
        return self._principal(pid)

    def list_principals(self, actor: Principal) -> list:
        authorize(actor, "list_principals")
        with self._lock:
            people = sorted(self._principals.values(),
                            key=lambda p: p.principal_id)
        if actor.role is Role.PATIENT:
            # patients see only the clinical staff they could consult
            people = [p for p in people if p.role is Role.MEDICAL_EXPERT]
        out = []
        for p in people:
            d = p.public_dict()
            if actor.role is not Role.ADMINISTRATOR and p.role is not Role.PATIENT:
                d.pop("assigned_staff", None)
            out.append(d)
        return out

    # ------------------------------------------------------------------
    # vitals

    def _policy_for(self, patient_id: str) -> ThresholdPolicy:
        policy = self._policies.get(patient_id)
        if policy is not None:
            return policy
        try:
            doc, version = self._store.snapshot_get("policies", patient_id)
        except KeyError:
            policy = ThresholdPolicy(patient_id=patient_id, version=0)
        else:
            bounds = {}
            for kind_raw, b in doc["bounds"].items():
                kind = VitalKind(kind_raw)
                bounds[kind] = Bound(b["low"], b["high"], b["unit"])
            policy = ThresholdPolicy(
                patient_id=patient_id,
                bounds=bounds,
                updated_by=doc.get("updated_by", ""),
                updated_at=(datetime.fromisoformat(doc["updated_at"])
                            if doc.get("updated_at") else None),
                version=version,
            )
        self._policies[patient_id] = policy
        return policy

    def _parse_reading(self, patient_id: str, device_id: str,
                       raw: dict) -> VitalReading:
        if not isinstance(raw, dict):
            raise MalformedReading("reading must be an object")
        if raw.get("patient_id", patient_id) != patient_id:
            raise MalformedReading("patient_id does not match batch patient")
        if raw.get("device_id", device_id) != device_id:
            raise MalformedReading("device_id does not match batch device")
        kind = VitalKind.parse(str(raw.get("kind")))
        taken_raw = raw.get("taken_at")
        try:
            taken_at = datetime.fromisoformat(taken_raw)
        except (TypeError, ValueError):
            raise MalformedReading(f"bad taken_at: {taken_raw!r}") from None
        reading = VitalReading(
            patient_id=patient_id,
            device_id=device_id,
            kind=kind,
            value=raw.get("value"),
            taken_at=taken_at,
            seq=raw.get("seq"),
        )
        reading.validate()
        return reading

    def ingest(self, actor: Principal, patient_id: str, device_id: str,
               readings: list) -> dict:
        """Accept one device batch; per-item outcome, never all-or-nothing.

        Accepted readings are classified, appended durably, then any
        abnormal ones raise alerts; that ordering keeps the alert stream
        derivable from the reading stream.
        """
        authorize(actor, "ingest_vitals", target_patient=patient_id)
        if not isinstance(readings, list) or not readings:
            raise BadRequest("readings must be a non-empty list")
        with self._lock:
            self._principal(patient_id)  # 404 before touching streams
            policy = self._policy_for(patient_id)
            items: list = []
            accepted: list = []
            key = (patient_id, device_id)
            seen = self._seen.setdefault(key, set())
            maxseq = self._maxseq.get(key, -1)
            batch_seen: set = set()
            for raw in readings:
                raw_seq = raw.get("seq") if isinstance(raw, dict) else None
                try:
                    reading = self._parse_reading(patient_id, device_id, raw)
                except (MalformedReading, UnknownVitalKind) as exc:
                    items.append(IngestItem(seq=raw_seq, status="malformed",
                                            error=str(exc)))
                    continue
                if reading.seq in seen or reading.seq in batch_seen:
                    items.append(IngestItem(seq=reading.seq, status="duplicate"))
                    continue
                if reading.seq <= maxseq:
                    items.append(IngestItem(
                        seq=reading.seq, status="out_of_order",
                        error=f"seq {reading.seq} arrived after {maxseq}"))
                    continue
                cls = classify(reading, policy)
                item = IngestItem(seq=reading.seq, status="accepted",
                                  classification=cls.status.value)
                items.append(item)
                accepted.append((reading, cls, item))
                batch_seen.add(reading.seq)
                maxseq = max(maxseq, reading.seq)

            received_at = self._clock.now()
            if accepted:
                self._store.stream("readings", patient_id).append_many(
                    self._reading_record(r, c, received_at)
                    for r, c, _ in accepted)
                for r, _, _ in accepted:
                    seen.add(r.seq)
                self._maxseq[key] = maxseq

            alerts_raised = 0
            for reading, cls, item in accepted:
                if cls.is_normal:
                    continue
                alert = self._raise_alert(reading, cls, policy, received_at)
                item.alert_id = alert.alert_id
                alerts_raised += 1

            self._audit(actor.principal_id, "ingest", patient_id,
                        f"device={device_id} n={len(readings)} "
                        f"accepted={len(accepted)} alerts={alerts_raised}")
            counts = {"accepted": 0, "duplicate": 0, "out_of_order": 0,
                      "malformed": 0}
            for it in items:
                counts[it.status] += 1
            return {
                "patient_id": patient_id,
                "device_id": device_id,
                "accepted": counts["accepted"],
                "duplicates": counts["duplicate"],
                "out_of_order": counts["out_of_order"],
                "malformed": counts["malformed"],
                "alerts_raised": alerts_raised,
                "items": [it.to_dict() for it in items],
            }

    @staticmethod
    def _reading_record(reading: VitalReading, cls, received_at) -> dict:
        return {
            "patient_id": reading.patient_id,
            "device_id": reading.device_id,
            "kind": reading.kind.value,
            "value": reading.value,
            "taken_at": reading.taken_at.isoformat(),
            "seq": reading.seq,
            "received_at": received_at.isoformat(),
            "status": cls.status.value,
            "bound_crossed": cls.bound_crossed,
            "policy_version": cls.policy_version,
        }

    def _raise_alert(self, reading: VitalReading, cls, policy,
                     received_at) -> Alert:
        bound = policy.bound_for(reading.kind)
        alert = Alert(
            alert_id=f"AL-{len(self._alert_order) + 1:06d}",
            patient_id=reading.patient_id,
            device_id=reading.device_id,
            kind=reading.kind,
            value=reading.value,
            seq=reading.seq,
            status=cls.status,
            bound_crossed=cls.bound_crossed,
            low=bound.low,
            high=bound.high,
            unit=bound.unit,
            policy_version=policy.version,
            taken_at=reading.taken_at,
            raised_at=received_at,
        )
        self._store.stream("alerts", "all").append(
            {"type": "raised", "alert": alert.to_dict()})
        self._alerts[alert.alert_id] = alert
        self._alert_order.append(alert.alert_id)
        if self._notifier is not None:
            self._notifier.dispatch(alert)
        return alert

    def query_vitals(self, actor: Principal, patient_id: str, *,
                     after: int = -1, device_id: Optional[str] = None,
                     kind: Optional[str] = None,
                     since: Optional[str] = None,
                     limit: Optional[int] = None) -> dict:
        authorize(actor, "read_vitals", target_patient=patient_id)
        self._principal(patient_id)
        limit = min(limit or self._cfg.vitals_page_limit,
                    self._cfg.vitals_page_limit)
        kind_v = VitalKind.parse(kind) if kind else None
        since_dt = datetime.fromisoformat(since) if since else None
        start = max(after + 1, 0)
        stream = self._store.stream("readings", patient_id)
        records = stream.read(from_offset=start)
        items = []
        cursor = after
        complete = True
        for i, rec in enumerate(records):
            offset = start + i
            cursor = offset
            if device_id is not None and rec["device_id"] != device_id:
                continue
            if kind_v is not None and rec["kind"] != kind_v.value:
                continue
            if since_dt is not None and \
                    datetime.fromisoformat(rec["taken_at"]) < since_dt:
                continue
            items.append({**rec, "offset": offset})
            if len(items) >= limit:
                complete = offset == start + len(records) - 1
                break
        return {"patient_id": patient_id, "items": items,
                "next_after": cursor, "complete": complete}

    # ------------------------------------------------------------------
    # thresholds

    def get_thresholds(self, actor: Principal, patient_id: str) -> dict:
        authorize(actor, "read_thresholds", target_patient=patient_id)
        self._principal(patient_id)
        with self._lock:
            policy = self._policy_for(patient_id)
        return self._policy_dict(policy)

    @staticmethod
    def _policy_dict(policy: ThresholdPolicy) -> dict:
        bounds = {}
        for kind in VitalKind:
            b = policy.bound_for(kind)
            bounds[kind.value] = {"low": b.low, "high": b.high, "unit": b.unit}
        return {
            "patient_id": policy.patient_id,
            "version": policy.version,
            "updated_by": policy.updated_by,
            "updated_at": (policy.updated_at.isoformat()
                           if policy.updated_at else None),
            "bounds": bounds,
        }

    def update_thresholds(self, actor: Principal, patient_id: str,
                          bounds: dict) -> dict:
        """Replace bounds for the kinds given; untouched kinds keep theirs."""
        authorize(actor, "write_thresholds", target_patient=patient_id)
        if not isinstance(bounds, dict) or not bounds:
            raise BadRequest("bounds must be a non-empty object")
        with self._lock:
            self._principal(patient_id)
            policy = self._policy_for(patient_id)
            merged = dict(policy.bounds)
            for kind_raw, b in bounds.items():
                kind = VitalKind.parse(str(kind_raw))
                if not isinstance(b, dict):
                    raise BadRequest(f"bounds for {kind.value} must be an object")
                unit = b.get("unit") or default_policy(kind)[2]
                merged[kind] = Bound(b.get("low"), b.get("high"), unit)
            now = self._clock.now()
            doc = {
                "patient_id": patient_id,
                "bounds": {k.value: {"low": v.low, "high": v.high,
                                     "unit": v.unit}
                           for k, v in merged.items()},
                "updated_by": actor.principal_id,
                "updated_at": now.isoformat(),
            }
            version = self._store.snapshot_upsert("policies", patient_id, doc)
            policy = ThresholdPolicy(
                patient_id=patient_id, bounds=merged,
                updated_by=actor.principal_id, updated_at=now,
                version=version)
            self._policies[patient_id] = policy
            self._audit(actor.principal_id, "update_thresholds", patient_id,
                        f"version={version}")
            return self._policy_dict(policy)

    # ------------------------------------------------------------------
    # alerts

    def list_alerts(self, actor: Principal, *, state: Optional[str] = None,
                    patient_id: Optional[str] = None) -> list:
        authorize(actor, "list_alerts")
        if state is not None and state not in ("open", "acknowledged"):
            raise BadRequest(f"unknown alert state filter: {state!r}")
        with self._lock:
            alerts = [self._alerts[a] for a in self._alert_order]
        if state is not None:
            alerts = [a for a in alerts if a.state == state]
        if patient_id is not None:
            alerts = [a for a in alerts if a.patient_id == patient_id]
        return [a.to_dict() for a in alerts]

    def acknowledge_alert(self, actor: Principal, alert_id: str) -> dict:
        authorize(actor, "ack_alert")
        with self._lock:
            alert = self._alerts.get(alert_id)
            if alert is None:
                raise NotFound(f"no such alert: {alert_id}")
            now = self._clock.now()
            updated = acknowledge(alert, actor.principal_id, now)
            self._store.stream("alerts", "all").append({
                "type": "acknowledged", "alert_id": alert_id,
                "by": actor.principal_id, "at": now.isoformat(),
            })
            self._alerts[alert_id] = updated
            self._audit(actor.principal_id, "ack_alert", alert_id)
            return updated.to_dict()

    def alert_recipients(self, alert: Alert) -> list:
        """Assigned staff of the patient; every medical expert if none."""
        with self._lock:
            patient = self._principals.get(alert.patient_id)
            if patient is not None and patient.assigned_staff:
                return list(patient.assigned_staff)
            return sorted(p.principal_id for p in self._principals.values()
                          if p.role is Role.MEDICAL_EXPERT)

    # ------------------------------------------------------------------
    # sessions

    def open_session(self, actor: Principal, target_id: str,
                     mode: str) -> dict:
        authorize(actor, "open_session")
        target = self._principal(target_id)
        sess = self.sessions.open(
            actor.principal_id, actor.role.value,
            target.principal_id, target.role.value,
            SessionMode.parse(mode))
        self._audit(actor.principal_id, "open_session", sess.session_id,
                    f"target={target_id} mode={mode}")
        return sess.summary()

    def accept_session(self, actor: Principal, session_id: str) -> dict:
        authorize(actor, "session_ops")
        sess = self.sessions.accept(actor.principal_id, session_id)
        self._audit(actor.principal_id, "accept_session", session_id)
        return sess.summary()

    def post_message(self, actor: Principal, session_id: str,
                     kind: str, payload: str) -> dict:
        authorize(actor, "session_ops")
        msg = self.sessions.post(actor.principal_id, session_id,
                                 MessageKind.parse(kind), payload)
        self._audit(actor.principal_id, "post_message", session_id,
                    f"seq={msg.seq} kind={kind}")
        return msg.to_dict()

    def fetch_events(self, actor: Principal, session_id: str, *,
                     after: int = -1, wait_s: float = 0.0) -> dict:
        authorize(actor, "session_ops")
        return self.sessions.fetch(actor.principal_id, session_id,
                                   after=after, wait_s=wait_s)

    def terminate_session(self, actor: Principal, session_id: str) -> dict:
        authorize(actor, "session_ops")
        sess = self.sessions.terminate(actor.principal_id, session_id)
        self._audit(actor.principal_id, "terminate_session", session_id)
        return sess.summary()

    def list_sessions(self, actor: Principal) -> list:
        authorize(actor, "session_ops")
        return self.sessions.sessions_for(actor.principal_id)

    # ------------------------------------------------------------------
    # objects

    def put_object(self, actor: Principal, data: bytes) -> dict:
        authorize(actor, "put_object")
        if len(data) > 16 * 1024 * 1024:
            raise BadRequest("object exceeds 16 MiB")
        ref = self._store.put_object(data)
        self._audit(actor.principal_id, "put_object", ref,
                    f"bytes={len(data)}")
        return {"ref": ref, "bytes": len(data)}

    def get_object(self, actor: Principal, ref: str) -> bytes:
        authorize(actor, "get_object")
        try:
            return self._store.get_object(ref)
        except ObjectNotFound:
            raise NotFound(f"no such object: {ref}") from None

    # ------------------------------------------------------------------
    # observability

    def health(self) -> dict:
        now = self._clock.now()
        return {
            "status": "ok",
            "time": now.isoformat(),
            "uptime_s": (now - self._started_at).total_seconds(),
        }

    def read_audit(self, actor: Principal, *, after: int = -1,
                   limit: int = 500) -> dict:
        authorize(actor, "read_audit")
        start = max(after + 1, 0)
        records = self._store.stream("audit", "all").read(
            from_offset=start, limit=limit)
        return {
            "items": [{**rec, "offset": start + i}
                      for i, rec in enumerate(records)],
            "next_after": start + len(records) - 1 if records else after,
        }

    def reliability_metrics(self, actor: Principal) -> dict:
        """Self-reported service reliability since process start.

        Failure count and downtime come from the fault injector's outage
        history; with no injector the service trivially reports itself
        perfect, which is honest for a process that answered the request.
        """
        authorize(actor, "read_metrics")
        now = self._clock.now()
        windows = self._faults.history(now) if self._faults else []
        downtime_s = Fraction(0)
        failures = 0
        for start, end in windows:
            start = max(start, self._started_at)
            if end <= start:
                continue
            downtime_s += Fraction((end - start).total_seconds())
            failures += 1
        period_s = Fraction((now - self._started_at).total_seconds())
        uptime_s = period_s - downtime_s
        out = {
            "since": self._started_at.isoformat(),
            "as_of": now.isoformat(),
            "period_hours": float(period_s / 3600),
            "uptime_min": float(uptime_s / 60),
            "downtime_min": float(downtime_s / 60),
            "failures": failures,
        }
        if period_s > 0:
            out["reliability"] = reliability_exact(failures,
                                                   float(period_s / 3600))
            out["availability_pct"] = float(availability(
                uptime_s / 60, downtime_s / 60))
        else:
            out["reliability"] = None
            out["availability_pct"] = None
        return out


def build_gateway(store: EmrStore, clock: Optional[Clock] = None,
                  config: Optional[GatewayConfig] = None,
                  sinks: Optional[list] = None,
                  faults: Optional[FaultInjector] = None):
    """Wire a service with a running notifier (or none when sinks is None).

    The notifier routes through the service's staffing table, and the
    service dispatches raised alerts to the notifier; this factory closes
    that cycle.
    """
    clock = clock or SystemClock()
    notifier = None
    box: dict = {}
    if sinks is not None:
        notifier = Notifier(store, clock, sinks,
                            route=lambda a: box["svc"].alert_recipients(a))
    svc = GatewayService(store, clock, config=config, notifier=notifier,
                         faults=faults)
    box["svc"] = svc
    if notifier is not None:
        notifier.start()
    return svc, notifier
