"""Objective service evaluation: probe-driven uptime measurement and the
reliability / availability / MTBF / MTTR arithmetic.

Definitions used throughout:

    failure rate        failures per hour of test period
    reliability         1 - failure_rate          (exact, not rounded)
    availability        uptime / (uptime + downtime) * 100
    MTTR                downtime / failures
    MTBF                uptime / failures, absent when failures = 0
                        (uptime is then only a lower bound)

One probe attributes one interval of up- or downtime; a failure is an
up-to-down transition (a log that opens down counts one). The module also
carries the published 48-hour reference table this system is evaluated
against; ``compare_with_reference`` recomputes every derived column and
flags entries the published table got wrong rather than reproducing them.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from fractions import Fraction
from pathlib import Path
from typing import Callable, Optional

from .clock import Clock, SystemClock, utcnow
from .rounding import round_frac

logger = logging.getLogger(__name__)

UP = "up"
DOWN = "down"


class InvalidPeriod(ValueError):
    pass


class InvalidWindow(ValueError):
    pass


class ProbeLogFormatError(ValueError):
    pass


def reliability(failure_count: int, period_hours: float) -> float:
    """Reliability score 1 - failures/period_hours, exact arithmetic.

    A failure rate above 1/hour clamps to 0.0 (and is logged); negative
    inputs and non-positive periods are rejected.
    """
    if period_hours <= 0:
        raise InvalidPeriod(f"period must be positive, got {period_hours}")
    if failure_count < 0:
        raise ValueError(f"failure count must be >= 0, got {failure_count}")
    rate = failure_count / period_hours
    if rate > 1:
        logger.warning("failure rate %.3f/h exceeds 1; clamping reliability to 0", rate)
        return 0.0
    return 1.0 - rate


def reliability_rounded_rate(failure_count: int, period_hours: float) -> float:
    """The published variant: failure rate rounded to one decimal before the
    subtraction (6 failures / 48 h -> 1 - 0.1 = 0.9 instead of 0.875)."""
    if period_hours <= 0:
        raise InvalidPeriod(f"period must be positive, got {period_hours}")
    return 1.0 - round(failure_count / period_hours, 1)


def availability(uptime_min: float, downtime_min: float) -> float:
    """Availability percentage to two decimals."""
    if uptime_min < 0 or downtime_min < 0:
        raise InvalidWindow("uptime/downtime must be >= 0")
    total = Fraction(uptime_min) + Fraction(downtime_min)
    if total == 0:
        raise InvalidWindow("uptime + downtime must be positive")
    return round_frac(Fraction(uptime_min) / total * 100, 2)


@dataclass
class ProbeLog:
    """Ordered equally-spaced probe outcomes against one target."""

    target: str
    interval_s: int
    entries: list[tuple[datetime, bool]] = field(default_factory=list)  # (timestamp, is_up)

    def validate(self) -> None:
        step = timedelta(seconds=self.interval_s)
        for prev, cur in zip(self.entries, self.entries[1:]):
            if cur[0] - prev[0] != step:
                raise ProbeLogFormatError(
                    f"probe spacing violated: {prev[0].isoformat()} -> {cur[0].isoformat()}"
                )

    def to_text(self) -> str:
        lines = [f"# probelog v1 target={self.target} interval_s={self.interval_s}"]
        for ts, is_up in self.entries:
            lines.append(f"{ts.isoformat()} {UP if is_up else DOWN}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ProbeLog":
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# probelog v1"):
            raise ProbeLogFormatError("line 1: missing '# probelog v1' header")
        meta = dict(
            part.split("=", 1) for part in lines[0].split()[2:] if "=" in part
        )
        try:
            log = cls(target=meta.get("target", "unknown"), interval_s=int(meta["interval_s"]))
        except (KeyError, ValueError) as exc:
            raise ProbeLogFormatError(f"line 1: bad header metadata: {exc}") from exc
        for n, line in enumerate(lines[1:], start=2):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                ts_raw, outcome = line.split()
                ts = datetime.fromisoformat(ts_raw)
            except ValueError as exc:
                raise ProbeLogFormatError(f"line {n}: {exc}") from exc
            if outcome not in (UP, DOWN):
                raise ProbeLogFormatError(f"line {n}: outcome must be up/down, got {outcome!r}")
            log.entries.append((ts, outcome == UP))
        log.validate()
        return log

    @classmethod
    def load(cls, path: str | Path) -> "ProbeLog":
        return cls.from_text(Path(path).read_text())

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_text())


@dataclass
class ReliabilityReport:
    label: str
    period_hours: float
    uptime_min: float
    downtime_min: float
    failures: int
    mttr_min: float
    mtbf_min: Optional[float]  # None when failures == 0 (uptime is a lower bound)
    reliability_score: float
    reliability_rounded_rate: float
    availability_pct: float

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "period_hours": self.period_hours,
            "uptime_min": self.uptime_min,
            "downtime_min": self.downtime_min,
            "failures": self.failures,
            "mttr_min": self.mttr_min,
            "mtbf_min": self.mtbf_min,
            "reliability": self.reliability_score,
            "reliability_rounded_rate": self.reliability_rounded_rate,
            "availability_pct": self.availability_pct,
        }


def count_failures(outcomes: list[bool]) -> int:
    """Up-to-down transitions; an opening down counts as one failure."""
    failures = 0
    prev_up = True
    for is_up in outcomes:
        if prev_up and not is_up:
            failures += 1
        prev_up = is_up
    return failures


def analyze(log: ProbeLog, label: str = "overall") -> ReliabilityReport:
    if not log.entries:
        raise InvalidWindow("empty probe log")
    outcomes = [up for _, up in log.entries]
    minutes_per_probe = Fraction(log.interval_s, 60)
    up_count = sum(outcomes)
    down_count = len(outcomes) - up_count
    uptime = Fraction(up_count) * minutes_per_probe
    downtime = Fraction(down_count) * minutes_per_probe
    failures = count_failures(outcomes)
    period_hours = float((uptime + downtime) / 60)
    return ReliabilityReport(
        label=label,
        period_hours=period_hours,
        uptime_min=float(uptime),
        downtime_min=float(downtime),
        failures=failures,
        mttr_min=float(downtime / failures) if failures else 0.0,
        mtbf_min=float(uptime / failures) if failures else None,
        reliability_score=reliability(failures, period_hours),
        reliability_rounded_rate=reliability_rounded_rate(failures, period_hours),
        availability_pct=availability(float(uptime), float(downtime)),
    )


def probe_run(
    check: Callable[[], bool],
    interval_s: int,
    duration_s: int,
    clock: Clock | None = None,
    target: str = "gateway",
) -> ProbeLog:
    """Probe `check` every interval for the duration; one entry per tick.

    The recorded timestamps are the nominal tick times (start + k*interval)
    so the spacing invariant holds regardless of check latency. A check
    that raises counts as down.
    """
    if interval_s < 1:
        raise InvalidPeriod(f"probe interval must be >= 1 s, got {interval_s}")
    if duration_s < interval_s:
        raise InvalidPeriod("duration shorter than one probe interval")
    clock = clock or SystemClock()
    start = clock.now()
    log = ProbeLog(target=target, interval_s=interval_s)
    ticks = duration_s // interval_s
    for k in range(ticks):
        try:
            is_up = bool(check())
        except Exception:
            is_up = False
        log.entries.append((start + timedelta(seconds=k * interval_s), is_up))
        clock.sleep(interval_s)
    return log


def synthesize_log(
    total_minutes: int,
    outages: list[tuple[int, int]],
    start: datetime | None = None,
    target: str = "synthetic",
) -> ProbeLog:
    """Build a one-minute-interval log that is down exactly during the given
    (start_minute, length_minutes) windows."""
    start = start or utcnow().replace(second=0, microsecond=0)
    down = set()
    for begin, length in outages:
        down.update(range(begin, begin + length))
    entries = [
        (start + timedelta(minutes=m), m not in down) for m in range(total_minutes)
    ]
    return ProbeLog(target=target, interval_s=60, entries=entries)


# ---------------------------------------------------------------------------
# Published 48-hour evaluation reference (six 8-hour test days) and the
# outage placement used to regenerate an equivalent probe log.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReferenceRow:
    label: str
    period_hours: int
    uptime_min: int
    downtime_min: int
    failures: int
    mttr_min: float
    mtbf_min: float


REFERENCE_DAYS = [
    ReferenceRow("Day 1", 8, 479, 1, 1, 1.0, 462.0),
    ReferenceRow("Day 2", 8, 478, 2, 1, 2.0, 465.0),
    ReferenceRow("Day 3", 8, 476, 4, 2, 4.0, 235.0),
    ReferenceRow("Day 4", 8, 478, 2, 1, 2.0, 471.0),
    ReferenceRow("Day 5", 8, 479, 1, 1, 1.0, 475.0),
    ReferenceRow("Day 6", 8, 480, 0, 0, 0.0, 480.0),
]
REFERENCE_OVERALL = ReferenceRow("Overall", 48, 2870, 10, 6, 10.0, 2588.0)
REFERENCE_RELIABILITY = 0.9   # published as 1 - 6/48 with the rate rounded to 0.1
REFERENCE_AVAILABILITY = 99.65
MINUTES_PER_DAY = 480

# (start_minute, length_minutes): reproduces the reference daily
# uptime/downtime/failure counts; exact outage positions were not published.
REFERENCE_OUTAGES: list[tuple[int, int]] = [
    (100, 1),     # day 1
    (680, 2),     # day 2
    (1100, 2),    # day 3, first outage
    (1300, 2),    # day 3, second outage
    (1660, 2),    # day 4
    (2100, 1),    # day 5
]


def reference_log(start: datetime | None = None) -> ProbeLog:
    return synthesize_log(
        6 * MINUTES_PER_DAY, REFERENCE_OUTAGES, start=start, target="reference-48h"
    )


def bundled_reference_log() -> ProbeLog:
    """The packaged 48-hour probe log (same content reference_log builds)."""
    from importlib import resources

    text = (resources.files("telemgmt") / "data" / "table2_probelog.txt").read_text()
    return ProbeLog.from_text(text)


def split_days(log: ProbeLog, minutes_per_day: int = MINUTES_PER_DAY) -> list[ProbeLog]:
    per_probe = log.interval_s / 60
    probes_per_day = int(minutes_per_day / per_probe)
    days = []
    for i in range(0, len(log.entries), probes_per_day):
        days.append(
            ProbeLog(log.target, log.interval_s, log.entries[i: i + probes_per_day])
        )
    return days


@dataclass
class Mismatch:
    row: str
    column: str
    computed: float
    printed: float

    def __str__(self) -> str:
        return (
            f"{self.row}: {self.column} computed {self.computed:g} "
            f"but published table prints {self.printed:g}"
        )


def compare_with_reference(
    day_reports: list[ReliabilityReport], overall: ReliabilityReport
) -> list[Mismatch]:
    """Flag every derived column where recomputation disagrees with the
    published table. A published MTBF equal to the uptime when failures = 0
    is accepted as the lower-bound convention, not a mismatch."""
    flags: list[Mismatch] = []
    rows = list(zip(day_reports, REFERENCE_DAYS)) + [(overall, REFERENCE_OVERALL)]
    for rep, ref in rows:
        for column, computed, printed in (
            ("uptime_min", rep.uptime_min, ref.uptime_min),
            ("downtime_min", rep.downtime_min, ref.downtime_min),
            ("failures", rep.failures, ref.failures),
            ("mttr_min", rep.mttr_min, ref.mttr_min),
        ):
            if abs(computed - printed) > 1e-9:
                flags.append(Mismatch(ref.label, column, computed, printed))
        if rep.mtbf_min is None:
            if abs(ref.mtbf_min - rep.uptime_min) > 1e-9:
                flags.append(Mismatch(ref.label, "mtbf_min", rep.uptime_min, ref.mtbf_min))
        elif abs(rep.mtbf_min - ref.mtbf_min) > 1e-9:
            flags.append(Mismatch(ref.label, "mtbf_min", rep.mtbf_min, ref.mtbf_min))
    if abs(overall.reliability_score - REFERENCE_RELIABILITY) > 1e-9:
        flags.append(
            Mismatch("Overall", "reliability", overall.reliability_score, REFERENCE_RELIABILITY)
        )
    if abs(overall.availability_pct - REFERENCE_AVAILABILITY) > 1e-9:
        flags.append(
            Mismatch("Overall", "availability_pct", overall.availability_pct, REFERENCE_AVAILABILITY)
        )
    return flags


def _fmt(value: Optional[float]) -> str:
    if value is None:
        return "-"
    return f"{value:g}"


def render_report(
    overall: ReliabilityReport,
    day_reports: list[ReliabilityReport] | None = None,
    mismatches: list[Mismatch] | None = None,
) -> str:
    """Human-readable reliability report (machine output via to_dict)."""
    lines = []
    header = f"{'':10} {'hrs':>5} {'uptime':>8} {'downtime':>9} {'failures':>9} {'MTTR':>6} {'MTBF':>8}"
    lines.append(header)
    for rep in (day_reports or []) + [overall]:
        mtbf = _fmt(rep.mtbf_min) if rep.mtbf_min is not None else f">={rep.uptime_min:g}"
        lines.append(
            f"{rep.label:10} {rep.period_hours:>5g} {rep.uptime_min:>8g} "
            f"{rep.downtime_min:>9g} {rep.failures:>9} {_fmt(rep.mttr_min):>6} {mtbf:>8}"
        )
    lines.append("")
    lines.append(f"availability: {overall.availability_pct:.2f}%")
    lines.append(
        f"reliability:  {overall.reliability_score:g} exact "
        f"({overall.failures} failures / {overall.period_hours:g} h)"
    )
    lines.append(
        f"              {overall.reliability_rounded_rate:g} with the failure rate "
        "rounded to one decimal (the convention the published evaluation used)"
    )
    if mismatches is not None:
        if mismatches:
            lines.append("")
            lines.append(f"published-table mismatches ({len(mismatches)}):")
            for m in mismatches:
                lines.append(f"  ! {m}")
        else:
            lines.append("")
            lines.append("published-table mismatches: none")
    return "\n".join(lines) + "\n"


def report_as_json(
    overall: ReliabilityReport,
    day_reports: list[ReliabilityReport] | None = None,
    mismatches: list[Mismatch] | None = None,
) -> str:
    doc = {"overall": overall.to_dict()}
    if day_reports is not None:
        doc["days"] = [r.to_dict() for r in day_reports]
    if mismatches is not None:
        doc["mismatches"] = [
            {"row": m.row, "column": m.column, "computed": m.computed, "printed": m.printed}
            for m in mismatches
        ]
    return json.dumps(doc, indent=2) + "\n"
