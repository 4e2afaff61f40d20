"""Wearable-device simulation and the store-and-forward uplink hub.

A patient profile drives one virtual device per vital kind.  Values follow
a clamped random walk around a per-kind baseline; scripted anomaly
episodes override the walk with uniform draws from a target range so tests
can provoke a known number of out-of-range readings.  Everything is
deterministic in the profile seed: generating a trace offline and running
the same profile through a hub produce identical values.

The hub buffers readings in FIFO order, transmits per-device batches on a
fixed cadence, retries through outages, and evicts oldest-first when its
buffer overflows.  Its report carries enough counters to check
conservation: generated = sent + evicted + still buffered.
"""

from __future__ import annotations

import logging
import random
from collections import deque
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Optional

import httpx

from .client import GatewayClient, GatewayError
from .clock import Clock, SimClock
from .vitals import VALUE_CEILING, VitalKind, VitalReading

log = logging.getLogger(__name__)

KIND_ORDER = (VitalKind.HEART_RATE, VitalKind.SYSTOLIC_BP,
              VitalKind.DIASTOLIC_BP)

DEVICE_SUFFIX = {
    VitalKind.HEART_RATE: "hr",
    VitalKind.SYSTOLIC_BP: "sbp",
    VitalKind.DIASTOLIC_BP: "dbp",
}


def device_id_for(patient_id: str, kind: VitalKind) -> str:
    return f"{patient_id}-{DEVICE_SUFFIX[kind]}"


@dataclass(frozen=True)
class KindProfile:
    baseline: int
    jitter: int
    clamp: tuple  # (lo, hi) inclusive walk bounds

    def __post_init__(self):
        lo, hi = self.clamp
        if not (0 <= lo <= hi <= VALUE_CEILING):
            raise ValueError(f"clamp {self.clamp} outside sane range")
        if not lo <= self.baseline <= hi:
            raise ValueError(f"baseline {self.baseline} outside clamp {self.clamp}")
        if self.jitter < 0:
            raise ValueError("jitter must be >= 0")


@dataclass(frozen=True)
class AnomalyEpisode:
    kind: VitalKind
    start_tick: int
    end_tick: int  # inclusive
    target: tuple  # (lo, hi) inclusive uniform draw range

    def __post_init__(self):
        if self.start_tick < 0 or self.end_tick < self.start_tick:
            raise ValueError("episode ticks must satisfy 0 <= start <= end")
        lo, hi = self.target
        if not (0 <= lo <= hi <= VALUE_CEILING):
            raise ValueError(f"target {self.target} outside sane range")

    def covers(self, tick: int) -> bool:
        return self.start_tick <= tick <= self.end_tick


# walk parameters kept well inside the default normal bands, so without an
# episode a simulated patient never alarms
DEFAULT_KIND_PROFILES = {
    VitalKind.HEART_RATE: KindProfile(75, 2, (60, 95)),
    VitalKind.SYSTOLIC_BP: KindProfile(120, 3, (105, 150)),
    VitalKind.DIASTOLIC_BP: KindProfile(78, 2, (65, 92)),
}


@dataclass(frozen=True)
class PatientSimProfile:
    patient_id: str
    seed: int
    kinds: dict = field(default_factory=lambda: dict(DEFAULT_KIND_PROFILES))
    episodes: tuple = ()

    def __post_init__(self):
        per_kind: dict = {}
        for ep in self.episodes:
            if ep.kind not in self.kinds:
                raise ValueError(f"episode for unsimulated kind {ep.kind.value}")
            for other in per_kind.get(ep.kind, ()):
                if ep.start_tick <= other.end_tick and other.start_tick <= ep.end_tick:
                    raise ValueError(f"overlapping episodes for {ep.kind.value}")
            per_kind.setdefault(ep.kind, []).append(ep)

    def episode_at(self, kind: VitalKind, tick: int) -> Optional[AnomalyEpisode]:
        for ep in self.episodes:
            if ep.kind is kind and ep.covers(tick):
                return ep
        return None

    @classmethod
    def from_dict(cls, d: dict) -> "PatientSimProfile":
        kinds = {}
        for kind_raw, kp in d.get("kinds", {}).items():
            kinds[VitalKind(kind_raw)] = KindProfile(
                baseline=kp["baseline"], jitter=kp["jitter"],
                clamp=tuple(kp["clamp"]))
        if not kinds:
            kinds = dict(DEFAULT_KIND_PROFILES)
        episodes = tuple(
            AnomalyEpisode(kind=VitalKind(ep["kind"]),
                           start_tick=ep["start_tick"],
                           end_tick=ep["end_tick"],
                           target=tuple(ep["target"]))
            for ep in d.get("episodes", ()))
        return cls(patient_id=d["patient_id"], seed=d["seed"],
                   kinds=kinds, episodes=episodes)

    def to_dict(self) -> dict:
        return {
            "patient_id": self.patient_id,
            "seed": self.seed,
            "kinds": {k.value: {"baseline": v.baseline, "jitter": v.jitter,
                                "clamp": list(v.clamp)}
                      for k, v in self.kinds.items()},
            "episodes": [{"kind": ep.kind.value, "start_tick": ep.start_tick,
                          "end_tick": ep.end_tick, "target": list(ep.target)}
                         for ep in self.episodes],
        }


def default_profile(patient_id: str, seed: int,
                    episodes: tuple = ()) -> PatientSimProfile:
    return PatientSimProfile(patient_id=patient_id, seed=seed,
                             episodes=episodes)


class TraceGenerator:
    """Incremental reading source; values depend only on (profile, tick)."""

    def __init__(self, profile: PatientSimProfile):
        self.profile = profile
        self._rng = random.Random(profile.seed)
        self._tick = 0
        self._last: dict = {}

    def tick(self, now: datetime) -> list:
        """Emit one reading per simulated kind for the current tick."""
        t = self._tick
        out = []
        for kind in KIND_ORDER:
            kp = self.profile.kinds.get(kind)
            if kp is None:
                continue
            episode = self.profile.episode_at(kind, t)
            if episode is not None:
                value = self._rng.randint(*episode.target)
            elif t == 0:
                value = kp.baseline
            else:
                lo, hi = kp.clamp
                step = self._rng.randint(-kp.jitter, kp.jitter)
                value = min(hi, max(lo, self._last[kind] + step))
            self._last[kind] = value
            out.append(VitalReading(
                patient_id=self.profile.patient_id,
                device_id=device_id_for(self.profile.patient_id, kind),
                kind=kind,
                value=value,
                taken_at=now,
                seq=t,
            ))
        self._tick += 1
        return out


def generate_trace(profile: PatientSimProfile, ticks: int,
                   start: Optional[datetime] = None,
                   sample_interval_s: float = 5.0) -> list:
    """The full deterministic trace as a flat list, tick-major.

    ``seq`` equals the tick index on every per-kind device, so a device's
    sequence numbers are exactly 0..ticks-1 with no gaps.
    """
    if ticks < 0:
        raise ValueError("ticks must be >= 0")
    start = start or datetime(2024, 1, 1, tzinfo=timezone.utc)
    gen = TraceGenerator(profile)
    out: list = []
    for t in range(ticks):
        out.extend(gen.tick(start + timedelta(seconds=t * sample_interval_s)))
    return out


@dataclass(frozen=True)
class HubConfig:
    sample_interval_s: float = 5.0
    transmit_interval_s: float = 30.0
    batch_cap: int = 50
    buffer_capacity: int = 10_000
    # (start_s, end_s) offsets from run start during which the uplink is cut
    outage_windows: tuple = ()

    def __post_init__(self):
        if self.sample_interval_s <= 0 or self.transmit_interval_s <= 0:
            raise ValueError("intervals must be positive")
        if self.batch_cap < 1 or self.buffer_capacity < 1:
            raise ValueError("batch_cap and buffer_capacity must be >= 1")
        for start, end in self.outage_windows:
            if end <= start or start < 0:
                raise ValueError(f"bad outage window ({start}, {end})")


@dataclass
class TransmissionReport:
    patient_id: str
    ticks: int = 0
    generated: int = 0
    sent: int = 0
    accepted: int = 0
    duplicates: int = 0
    out_of_order: int = 0
    malformed: int = 0
    evicted: int = 0
    buffered_final: int = 0
    buffered_peak: int = 0
    retries: int = 0
    transmissions: int = 0
    alerts_reported: int = 0
    halted: bool = False
    halt_reason: str = ""

    def conserved(self) -> bool:
        return self.generated == self.sent + self.evicted + self.buffered_final

    def to_dict(self) -> dict:
        return dict(self.__dict__)


class Hub:
    """Store-and-forward uplink for one patient's devices."""

    def __init__(self, profile: PatientSimProfile, config: HubConfig,
                 client: GatewayClient, clock: Optional[Clock] = None):
        self.profile = profile
        self.config = config
        self.client = client
        self.clock = clock or SimClock()
        self.report = TransmissionReport(patient_id=profile.patient_id)
        self._buffer: deque = deque()
        self._gen = TraceGenerator(profile)
        self._run_start: Optional[datetime] = None

    # -- link state ----------------------------------------------------

    def _elapsed_s(self) -> float:
        return (self.clock.now() - self._run_start).total_seconds()

    def _link_up(self) -> bool:
        elapsed = self._elapsed_s()
        return not any(start <= elapsed < end
                       for start, end in self.config.outage_windows)

    # -- pipeline ------------------------------------------------------

    def _buffer_readings(self, readings: list) -> None:
        self._buffer.extend(readings)
        self.report.generated += len(readings)
        while len(self._buffer) > self.config.buffer_capacity:
            self._buffer.popleft()  # oldest reading is the least useful
            self.report.evicted += 1
        self.report.buffered_peak = max(self.report.buffered_peak,
                                        len(self._buffer))

    def _drain(self) -> None:
        """Send buffered readings as per-device batches, oldest first.

        Stops at the first failure; whatever was not acknowledged stays
        buffered in original order for the next cadence point.
        """
        if not self._link_up():
            self.report.retries += 1
            return
        while self._buffer and not self.report.halted:
            device_id = self._buffer[0].device_id
            batch = []
            for r in self._buffer:
                if r.device_id == device_id:
                    batch.append(r)
                    if len(batch) >= self.config.batch_cap:
                        break
            payload = [{
                "patient_id": r.patient_id, "device_id": r.device_id,
                "kind": r.kind.value, "value": r.value,
                "taken_at": r.taken_at.isoformat(), "seq": r.seq,
            } for r in batch]
            try:
                resp = self.client.ingest(self.profile.patient_id,
                                          device_id, payload)
            except GatewayError as exc:
                if exc.status_code in (401, 403):
                    self.report.halted = True
                    self.report.halt_reason = f"{exc.code}: {exc.detail}"
                    log.error("hub %s halted: %s", self.profile.patient_id,
                              self.report.halt_reason)
                else:
                    self.report.retries += 1
                return
            except httpx.HTTPError as exc:
                self.report.retries += 1
                log.warning("hub %s transmit failed: %s",
                            self.profile.patient_id, exc)
                return
            self.report.transmissions += 1
            self.report.sent += len(batch)
            self.report.accepted += resp.get("accepted", 0)
            self.report.duplicates += resp.get("duplicates", 0)
            self.report.out_of_order += resp.get("out_of_order", 0)
            self.report.malformed += resp.get("malformed", 0)
            raised = resp.get("alerts_raised", 0)
            if raised:
                self.report.alerts_reported += raised
                log.warning("hub %s: gateway raised %d alert(s)",
                            self.profile.patient_id, raised)
            sent_keys = {(r.device_id, r.seq) for r in batch}
            self._buffer = deque(
                r for r in self._buffer
                if (r.device_id, r.seq) not in sent_keys)

    def run(self, ticks: int) -> TransmissionReport:
        if ticks < 0:
            raise ValueError("ticks must be >= 0")
        self._run_start = self.clock.now()
        cadence = max(1, round(self.config.transmit_interval_s
                               / self.config.sample_interval_s))
        for t in range(ticks):
            self._buffer_readings(self._gen.tick(self.clock.now()))
            if (t + 1) % cadence == 0:
                self._drain()
            if self.report.halted:
                break
            self.clock.sleep(self.config.sample_interval_s)
        if not self.report.halted and self._buffer:
            self._drain()  # final flush so a quiet shutdown loses nothing
        self.report.ticks = ticks
        self.report.buffered_final = len(self._buffer)
        return self.report


def run_hub(profile: PatientSimProfile, config: HubConfig,
            client: GatewayClient, ticks: int,
            clock: Optional[Clock] = None) -> TransmissionReport:
    return Hub(profile, config, client, clock=clock).run(ticks)
