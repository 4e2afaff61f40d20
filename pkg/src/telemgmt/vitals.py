"""Vital-sign domain model: reading types, threshold policies and the
deterministic classification that drives alerting.

Default thresholds (established with clinical staff, per-patient
overridable):

    heart rate    abnormal below 50 or above 100 bpm
    systolic BP   abnormal below 100 or above 160 mmHg
    diastolic BP  abnormal below 60 or above 95 mmHg

A value equal to a bound is Normal: abnormality is strictly outside the
bounds. Classification is pure and total over sane integer inputs; readings
outside the sanity window [0, 400] are malformed, not clinical events.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Optional

VALUE_CEILING = 400  # sanity ceiling: rejects transmission garbage, not a clinical bound


class VitalKind(str, Enum):
    HEART_RATE = "heart_rate"
    SYSTOLIC_BP = "systolic_bp"
    DIASTOLIC_BP = "diastolic_bp"

    @classmethod
    def parse(cls, raw: str) -> "VitalKind":
        try:
            return cls(raw)
        except ValueError:
            raise UnknownVitalKind(raw) from None


class Status(str, Enum):
    NORMAL = "normal"
    BELOW_LOW = "below_low"
    ABOVE_HIGH = "above_high"


class UnknownVitalKind(ValueError):
    def __init__(self, kind: object):
        super().__init__(f"unsupported vital kind: {kind!r}")
        self.kind = kind


class MalformedReading(ValueError):
    """Reading failed sanity validation (wrong type, negative, above ceiling)."""


class InvalidBounds(ValueError):
    """Threshold bounds rejected (low >= high, or not integers)."""


# (low, high, unit) per kind; values strictly outside [low, high] are abnormal.
DEFAULT_BOUNDS: dict[VitalKind, tuple[int, int, str]] = {
    VitalKind.HEART_RATE: (50, 100, "bpm"),
    VitalKind.SYSTOLIC_BP: (100, 160, "mmHg"),
    VitalKind.DIASTOLIC_BP: (60, 95, "mmHg"),
}


def default_policy(kind: VitalKind | str) -> tuple[int, int, str]:
    """Return the default (low, high, unit) for a vital kind."""
    if not isinstance(kind, VitalKind):
        kind = VitalKind.parse(str(kind))
    return DEFAULT_BOUNDS[kind]


@dataclass(frozen=True)
class Bound:
    low: int
    high: int
    unit: str

    def __post_init__(self):
        if not isinstance(self.low, int) or not isinstance(self.high, int):
            raise InvalidBounds(f"bounds must be integers, got ({self.low!r}, {self.high!r})")
        if self.low >= self.high:
            raise InvalidBounds(f"low must be strictly below high, got ({self.low}, {self.high})")


@dataclass(frozen=True)
class VitalReading:
    """One timestamped sensor measurement.

    ``seq`` is assigned by the emitting device and strictly increases per
    (patient_id, device_id); the gateway uses it for duplicate detection.
    """

    patient_id: str
    device_id: str
    kind: VitalKind
    value: int
    taken_at: datetime
    seq: int

    def validate(self) -> None:
        """Raise MalformedReading if the reading fails sanity checks."""
        if not isinstance(self.value, int) or isinstance(self.value, bool):
            raise MalformedReading(f"value must be an integer, got {self.value!r}")
        if self.value < 0:
            raise MalformedReading(f"negative value {self.value}")
        if self.value > VALUE_CEILING:
            raise MalformedReading(f"value {self.value} above sanity ceiling {VALUE_CEILING}")
        if not isinstance(self.seq, int) or self.seq < 0:
            raise MalformedReading(f"seq must be a non-negative integer, got {self.seq!r}")


def _default_bounds_map() -> dict[VitalKind, Bound]:
    return {k: Bound(lo, hi, unit) for k, (lo, hi, unit) in DEFAULT_BOUNDS.items()}


@dataclass
class ThresholdPolicy:
    """Per-patient low/high bounds per vital kind.

    A kind missing from ``bounds`` falls back to the defaults, so a policy
    answers for every supported kind.
    """

    patient_id: str
    bounds: dict[VitalKind, Bound] = field(default_factory=dict)
    updated_by: str = ""
    updated_at: Optional[datetime] = None
    version: int = 0

    def bound_for(self, kind: VitalKind) -> Bound:
        got = self.bounds.get(kind)
        if got is not None:
            return got
        lo, hi, unit = default_policy(kind)
        return Bound(lo, hi, unit)

    @classmethod
    def defaults(cls, patient_id: str) -> "ThresholdPolicy":
        return cls(patient_id=patient_id, bounds=_default_bounds_map())


@dataclass(frozen=True)
class Classification:
    status: Status
    bound_crossed: Optional[int] = None
    policy_version: int = 0

    @property
    def is_normal(self) -> bool:
        return self.status is Status.NORMAL


def classify(reading: VitalReading, policy: ThresholdPolicy) -> Classification:
    """Classify a reading against a policy. Pure and deterministic.

    below_low iff value < low, above_high iff value > high, normal
    otherwise (bounds inclusive). Raises MalformedReading for values
    outside the sanity window.
    """
    reading.validate()
    bound = policy.bound_for(reading.kind)
    if reading.value < bound.low:
        return Classification(Status.BELOW_LOW, bound.low, policy.version)
    if reading.value > bound.high:
        return Classification(Status.ABOVE_HIGH, bound.high, policy.version)
    return Classification(Status.NORMAL, None, policy.version)
