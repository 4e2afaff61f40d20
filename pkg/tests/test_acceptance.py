"""Release acceptance gate.

One test per release criterion; each prints a single PASS/FAIL line (visible
with -s, or in captured output) and pytest -v shows one verdict per
criterion. Tolerances are pinned here and nowhere else:

    C1  bundled probe-log availability   99.65 +/- 0.01, counts exact, < 1 s
    C2  reliability arithmetic           0.875 exact, rounded-rate note, edges
    C3  bundled survey reproduction      8/9 means +/- 0.005, Q8 flagged,
                                         composites exact, < 1 s
    C4  end-to-end alerting              alert set == offline classification,
                                         one delivered SMS each, <= one
                                         transmit interval latency, < 2 min
    C5  store-and-forward outage         gap-free, duplicate-free, conserved
    C6  reliability harness round-trip   6 outages / 10 min recovered exactly,
                                         availability +/- 0.01
    C7  access-control sweep             every (action, role) matches the
                                         documented matrix
    C8  session state machine            exhaustive (state, op) table + equal
                                         dual-client transcripts, 100 msgs
"""

from __future__ import annotations

import itertools
import random
import threading
import time
from contextlib import contextmanager
from datetime import timedelta

import pytest
from fastapi.testclient import TestClient

from telemgmt import reliability as rel
from telemgmt import survey as surv
from telemgmt.client import GatewayClient
from telemgmt.clock import SimClock
from telemgmt.errors import (
    InvalidTransition,
    SessionClosed,
    SessionNotActive,
)
from telemgmt.gateway.app import create_app
from telemgmt.gateway.auth import DENY, PERMISSIONS, Role
from telemgmt.gateway.faults import FaultInjector
from telemgmt.gateway.service import GatewayConfig, build_gateway
from telemgmt.notifier import SmsSimSink
from telemgmt.sessions import SessionManager, SessionMode
from telemgmt.simulator import (
    AnomalyEpisode,
    Hub,
    HubConfig,
    PatientSimProfile,
    generate_trace,
)
from telemgmt.store import EmrStore
from telemgmt.vitals import Status, ThresholdPolicy, VitalKind, classify


# one (tag, verdict) line per criterion, echoed after the run by the
# terminal-summary hook in conftest.py so plain `pytest -v` shows them
RESULTS: list[str] = []


@contextmanager
def criterion(tag: str, title: str):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException:
        line = f"{tag} FAIL {title}"
        print(line)
        RESULTS.append(line)
        raise
    line = f"{tag} PASS {title} ({time.perf_counter() - t0:.2f}s)"
    print(line)
    RESULTS.append(line)


# ---------------------------------------------------------------------------
# shared gateway scaffolding (fresh instance per criterion that needs one)

class Env:
    def __init__(self, tmp_path, name, *, sinks=None, faults_on=False):
        self.clock = SimClock()
        self.store = EmrStore(tmp_path / name)
        self.faults = FaultInjector(self.clock) if faults_on else None
        self.service, self.notifier = build_gateway(
            self.store, self.clock, config=GatewayConfig(), sinks=sinks,
            faults=self.faults)
        self.service.ensure_bootstrap_admin("boot-secret")
        self.app = create_app(self.service, self.clock, faults=self.faults)

    def client(self, principal_id=None, secret=None) -> GatewayClient:
        c = GatewayClient(http=TestClient(self.app))
        if principal_id is not None:
            c.login(principal_id, secret)
        return c

    def admin(self) -> GatewayClient:
        return self.client("ADM-0000", "boot-secret")

    def close(self):
        if self.notifier is not None:
            self.notifier.stop()
        self.store.close()


# ---------------------------------------------------------------------------
# C1 availability reproduction


def test_c1_availability_reproduction():
    with criterion("[C1]", "bundled probe log reproduces the published "
                           "availability figures"):
        t0 = time.perf_counter()
        overall = rel.analyze(rel.bundled_reference_log())
        elapsed = time.perf_counter() - t0
        assert overall.uptime_min == 2870.0
        assert overall.downtime_min == 10.0
        assert overall.failures == 6
        assert abs(overall.availability_pct - 99.65) <= 0.01
        assert elapsed < 1.0, f"analysis took {elapsed:.3f}s"


# ---------------------------------------------------------------------------
# C2 reliability formula


def test_c2_reliability_formula():
    with criterion("[C2]", "reliability arithmetic: exact score, published "
                           "rounded-rate variant, boundary properties"):
        assert rel.reliability(6, 48) == 0.875  # exact, no rounding slip
        assert rel.reliability_rounded_rate(6, 48) == 0.9

        # the report prints both figures and marks the rounded one as the
        # published convention
        text = rel.render_report(rel.analyze(rel.bundled_reference_log()))
        assert "0.875 exact" in text
        assert "0.9 with the failure rate rounded to one decimal" in text
        assert "the convention the published evaluation used" in text

        rng = random.Random(0xC2)
        for _ in range(300):
            t_int = rng.randint(1, 10**6)
            assert rel.reliability(0, t_int) == 1.0
            assert rel.reliability(t_int, t_int) == 0.0
            t_float = rng.uniform(1e-3, 1e6)
            assert rel.reliability(0, t_float) == 1.0


# ---------------------------------------------------------------------------
# C3 survey reproduction


def test_c3_survey_reproduction():
    with criterion("[C3]", "bundled survey dataset: 8/9 printed means "
                           "reproduced, Q8 flagged, composites exact"):
        t0 = time.perf_counter()
        items = surv.parse_dataset(surv.bundled_dataset_text())
        report = surv.analyze_survey(items)
        elapsed = time.perf_counter() - t0

        assert len(report.stats) == 9
        flagged = [s.item.item_id for s in report.stats if s.mean_discrepancy]
        assert flagged == ["Q8"]
        q8 = next(s for s in report.stats if s.item.item_id == "Q8")
        assert q8.mean == pytest.approx(4.18, abs=0.005)
        assert float(q8.item.printed_mean) == pytest.approx(4.30, abs=0.005)
        for s in report.stats:
            if s.item.item_id != "Q8":
                assert abs(float(s.item.printed_mean) - s.mean) <= 0.005, \
                    s.item.item_id

        assert report.composites_printed["SEU"] == (4.22, 90.67)
        assert report.composites_printed["SDR"] == (4.20, 88.00)
        assert elapsed < 1.0, f"analysis took {elapsed:.3f}s"


# ---------------------------------------------------------------------------
# C4 end-to-end alerting


def test_c4_end_to_end_alerting(tmp_path):
    with criterion("[C4]", "scheduled hypertensive episode: alerts match "
                           "offline classification, one SMS each, within one "
                           "transmit interval"):
        t_start = time.perf_counter()
        outbox = tmp_path / "outbox.txt"
        clock = SimClock()
        store = EmrStore(tmp_path / "c4-data")
        sms = SmsSimSink(outbox, clock)
        service, notifier = build_gateway(store, clock,
                                          config=GatewayConfig(), sinks=[sms])
        service.ensure_bootstrap_admin("boot-secret")
        app = create_app(service, clock)

        admin = GatewayClient(http=TestClient(app))
        admin.login("ADM-0000", "boot-secret")
        expert = admin.register("medical_expert", "On-call Doctor",
                                secret="pw")
        patients = [
            admin.register("patient", f"Sim Patient {i}", secret="pw",
                           assigned_staff=[expert["id"]])
            for i in range(3)
        ]

        # patient 0 carries the scheduled episode; the walk parameters keep
        # every other reading inside the default normal bands
        episode = AnomalyEpisode(kind=VitalKind.SYSTOLIC_BP, start_tick=40,
                                 end_tick=60, target=(162, 170))
        profiles = [
            PatientSimProfile(patient_id=patients[i]["id"], seed=500 + i,
                              episodes=(episode,) if i == 0 else ())
            for i in range(3)
        ]

        ticks = 120  # 10 simulated minutes at a 5 s sample interval
        hub_cfg = HubConfig(sample_interval_s=5, transmit_interval_s=30)
        for i, profile in enumerate(profiles):  # back-to-back on one clock
            pc = GatewayClient(http=TestClient(app))
            pc.login(patients[i]["id"], "pw")
            report = Hub(profile, hub_cfg, pc, clock=clock).run(ticks)
            assert not report.halted
            assert report.conserved()
            assert report.sent == report.generated == ticks * 3
        notifier.flush()

        # offline oracle: classify the deterministic traces directly
        expected = set()
        for profile in profiles:
            policy = ThresholdPolicy.defaults(profile.patient_id)
            for r in generate_trace(profile, ticks):
                if classify(r, policy).status is not Status.NORMAL:
                    expected.add((r.patient_id, r.device_id, r.seq, r.value))
        assert len(expected) == 60 - 40 + 1  # exactly the episode ticks

        doctor = GatewayClient(http=TestClient(app))
        doctor.login(expert["id"], "pw")
        alerts = doctor.alerts()
        got = {(a["patient_id"], a["device_id"], a["seq"], a["value"])
               for a in alerts}
        assert got == expected
        assert all(a["kind"] == "systolic_bp" and a["value"] > 160
                   for a in alerts)

        # exactly one delivered SMS record per alert, to the assigned expert
        for a in alerts:
            delivered = [r for r in notifier.records(a["alert_id"])
                         if r.outcome == "delivered"]
            assert len(delivered) == 1
            assert delivered[0].recipient == expert["id"]
            assert delivered[0].sink == "sms_sim"
        assert len(sms.lines()) == len(alerts)

        # each alert raised within one transmit interval of its reading
        from datetime import datetime
        for a in alerts:
            delay = (datetime.fromisoformat(a["raised_at"])
                     - datetime.fromisoformat(a["taken_at"])).total_seconds()
            assert 0.0 <= delay <= 30.0, f"{a['alert_id']} delayed {delay}s"

        notifier.stop()
        store.close()
        elapsed = time.perf_counter() - t_start
        assert elapsed < 120.0, f"scenario took {elapsed:.1f}s"


# ---------------------------------------------------------------------------
# C5 store-and-forward through an outage


def test_c5_store_and_forward_outage(tmp_path):
    with criterion("[C5]", "2-minute gateway outage mid-run: stored "
                           "sequences gap-free and duplicate-free, "
                           "conservation holds"):
        env = Env(tmp_path, "c5", faults_on=True)
        admin = env.admin()
        patient = admin.register("patient", "Buffering Patient", secret="pw")
        pid = patient["id"]

        start = env.clock.now()
        env.faults.schedule(start + timedelta(seconds=240),
                            start + timedelta(seconds=360))

        pc = env.client(pid, "pw")
        profile = PatientSimProfile(patient_id=pid, seed=7)
        report = Hub(profile, HubConfig(sample_interval_s=5,
                                        transmit_interval_s=30),
                     pc, clock=env.clock).run(120)

        assert not report.halted
        assert report.retries >= 1          # the outage was actually hit
        assert report.conserved()
        assert report.evicted == 0
        assert report.buffered_final == 0
        assert report.sent == report.generated == 360
        assert report.duplicates == 0

        stored = pc.vitals(pid)
        assert stored["complete"]
        by_device: dict = {}
        for item in stored["items"]:
            by_device.setdefault(item["device_id"], []).append(item["seq"])
        assert len(by_device) == 3
        for device_id, seqs in by_device.items():
            assert seqs == list(range(120)), device_id  # gap- and dup-free
        env.close()


# ---------------------------------------------------------------------------
# C6 reliability harness round-trip


def test_c6_reliability_round_trip(tmp_path):
    with criterion("[C6]", "six injected outages over a compressed 48 h run "
                           "recovered exactly by probe + analysis"):
        env = Env(tmp_path, "c6", faults_on=True)
        start = env.clock.now()
        for begin_min, length_min in rel.REFERENCE_OUTAGES:
            env.faults.schedule(
                start + timedelta(minutes=begin_min),
                start + timedelta(minutes=begin_min + length_min))
        assert sum(length for _, length in rel.REFERENCE_OUTAGES) == 10

        probe = GatewayClient(http=TestClient(env.app))
        log = rel.probe_run(probe.is_healthy, interval_s=60,
                            duration_s=48 * 3600, clock=env.clock)
        report = rel.analyze(log)

        assert report.failures == 6
        assert report.downtime_min == 10.0
        assert report.uptime_min == 2870.0
        assert abs(report.availability_pct - 99.65) <= 0.01
        env.close()


# ---------------------------------------------------------------------------
# C7 access-control sweep


def test_c7_rbac_matrix(tmp_path):
    with criterion("[C7]", "every (action, role) pair behaves exactly as the "
                           "documented access matrix says"):
        env = Env(tmp_path, "c7")
        admin = env.admin()
        e1 = admin.register("medical_expert", "Sweep Doctor One", secret="pw")
        admin.register("medical_expert", "Sweep Doctor Two", secret="pw")
        p1 = admin.register("patient", "Sweep Patient One", secret="pw",
                            assigned_staff=[e1["id"]])
        p2 = admin.register("patient", "Sweep Patient Two", secret="pw")

        doctor = env.client(e1["id"], "pw")
        patient = env.client(p1["id"], "pw")
        actors = {Role.PATIENT: patient, Role.MEDICAL_EXPERT: doctor,
                  Role.ADMINISTRATOR: admin}

        # one open alert and one stored object as sweep targets
        doctor.ingest(p1["id"], "sweep-alert", [
            {"kind": "systolic_bp", "value": 170,
             "taken_at": "2024-01-01T00:00:00+00:00", "seq": 0}])
        alert_id = doctor.alerts()[0]["alert_id"]
        blob_ref = doctor.put_object(b"sweep blob")["ref"]

        counters = itertools.count(1)

        def raw(c: GatewayClient):
            return c._http, {"Authorization": f"Bearer {c.token}"}

        def status_of(action: str, c: GatewayClient) -> int:
            http, headers = raw(c)
            n = next(counters)
            if action == "register_principal":
                return http.post("/api/principals", headers=headers, json={
                    "role": "patient", "name": f"Sweep Reg {n}",
                    "secret": "x"}).status_code
            if action == "list_principals":
                return http.get("/api/principals",
                                headers=headers).status_code
            if action == "ingest_vitals":
                return http.post(f"/api/patients/{p1['id']}/vitals",
                                 headers=headers, json={
                                     "device_id": f"sweep-{n}",
                                     "readings": [{
                                         "kind": "heart_rate", "value": 72,
                                         "taken_at":
                                             "2024-01-01T00:00:00+00:00",
                                         "seq": 0}]}).status_code
            if action == "read_vitals":
                return http.get(f"/api/patients/{p1['id']}/vitals",
                                headers=headers).status_code
            if action == "read_thresholds":
                return http.get(f"/api/patients/{p1['id']}/thresholds",
                                headers=headers).status_code
            if action == "write_thresholds":
                return http.put(f"/api/patients/{p1['id']}/thresholds",
                                headers=headers, json={"bounds": {
                                    "heart_rate": {"low": 50, "high": 100},
                                }}).status_code
            if action == "list_alerts":
                return http.get("/api/alerts", headers=headers).status_code
            if action == "ack_alert":
                return http.post(f"/api/alerts/{alert_id}/ack",
                                 headers=headers).status_code
            if action == "open_session":
                target = (e1["id"] if c is patient else p2["id"])
                return http.post("/api/sessions", headers=headers, json={
                    "target_id": target,
                    "mode": "patient_physician"}).status_code
            if action == "session_ops":
                return http.get("/api/sessions",
                                headers=headers).status_code
            if action == "put_object":
                return http.post("/api/objects", headers=headers,
                                 content=b"sweep").status_code
            if action == "get_object":
                return http.get(f"/api/objects/{blob_ref}",
                                headers=headers).status_code
            if action == "read_metrics":
                return http.get("/api/metrics/reliability",
                                headers=headers).status_code
            if action == "read_audit":
                return http.get("/api/audit", headers=headers).status_code
            raise AssertionError(f"sweep does not cover action {action!r}")

        # total sweep: every documented action crossed with every role
        for action in sorted(PERMISSIONS):
            for role, client in actors.items():
                rule = PERMISSIONS[action].get(role, DENY)
                got = status_of(action, client)
                if rule is DENY:
                    assert got == 403, (action, role.value, got)
                else:
                    assert got < 400, (action, role.value, got)

        # ownership scope: patient A on patient B's data is denied...
        http, headers = raw(patient)
        assert http.get(f"/api/patients/{p2['id']}/vitals",
                        headers=headers).status_code == 403
        assert http.get(f"/api/patients/{p2['id']}/thresholds",
                        headers=headers).status_code == 403
        # ...while staff may read any patient
        http, headers = raw(doctor)
        assert http.get(f"/api/patients/{p2['id']}/vitals",
                        headers=headers).status_code == 200
        env.close()


# ---------------------------------------------------------------------------
# C8 session state machine


STATE_OPS = [
    ("requested", "accept", None),
    ("requested", "post", SessionNotActive),
    ("requested", "terminate", None),
    ("requested", "fetch", None),
    ("active", "accept", InvalidTransition),
    ("active", "post", None),
    ("active", "terminate", None),
    ("active", "fetch", None),
    ("terminated", "accept", InvalidTransition),
    ("terminated", "post", SessionClosed),
    ("terminated", "terminate", InvalidTransition),
    ("terminated", "fetch", None),
]


def test_c8_session_state_machine(tmp_path):
    with criterion("[C8]", "exhaustive (state, operation) behavior plus "
                           "identical dual-client transcripts under "
                           "concurrent posting"):
        # part one: every (state, op) pair, each on a fresh session
        assert len(STATE_OPS) == 3 * 4  # the enumeration is total
        from telemgmt.sessions import MessageKind

        store = EmrStore(tmp_path / "c8-machine")
        mgr = SessionManager(store, SimClock())

        def fresh(state: str):
            sess = mgr.open("PAT-0001", "patient", "EXP-0001",
                            "medical_expert", SessionMode.PATIENT_PHYSICIAN)
            if state in ("active", "terminated"):
                mgr.accept("EXP-0001", sess.session_id)
            if state == "terminated":
                mgr.terminate("PAT-0001", sess.session_id)
            return sess.session_id

        def apply(op: str, sid: str):
            if op == "accept":
                mgr.accept("EXP-0001", sid)
            elif op == "post":
                mgr.post("PAT-0001", sid, MessageKind.TEXT, "hello")
            elif op == "terminate":
                mgr.terminate("PAT-0001", sid)
            else:
                mgr.fetch("PAT-0001", sid)

        for state, op, expected_error in STATE_OPS:
            sid = fresh(state)
            if expected_error is None:
                apply(op, sid)  # must not raise
            else:
                with pytest.raises(expected_error):
                    apply(op, sid)
        store.close()

        # part two: concurrent dual-client posting over HTTP
        env = Env(tmp_path, "c8-http")
        admin = env.admin()
        doc = admin.register("medical_expert", "Chat Doctor", secret="pw")
        pat = admin.register("patient", "Chat Patient", secret="pw")
        doctor = env.client(doc["id"], "pw")
        patient = env.client(pat["id"], "pw")

        sid = patient.open_session(doc["id"],
                                   "patient_physician")["session_id"]
        doctor.accept_session(sid)

        per_side = 50
        errors: list = []

        def pump(client: GatewayClient, tag: str):
            try:
                for i in range(per_side):
                    client.post_message(sid, "text", f"{tag}-{i}")
            except Exception as exc:  # surfaces in the main thread
                errors.append(exc)

        threads = [threading.Thread(target=pump, args=(patient, "pat")),
                   threading.Thread(target=pump, args=(doctor, "doc"))]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert errors == []

        view_p = patient.events(sid)["messages"]
        view_d = doctor.events(sid)["messages"]
        strip = [(m["seq"], m["sender"], m["payload"]) for m in view_p]
        assert strip == [(m["seq"], m["sender"], m["payload"])
                         for m in view_d]
        assert len(strip) == 2 * per_side
        assert [s for s, _, _ in strip] == list(range(2 * per_side))
        for tag, sender in (("pat", pat["id"]), ("doc", doc["id"])):
            own = [p for _, s, p in strip if s == sender]
            assert own == [f"{tag}-{i}" for i in range(per_side)]
        env.close()
