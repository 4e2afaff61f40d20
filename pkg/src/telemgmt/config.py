"""JSON run configuration for the CLI entry points."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .simulator import HubConfig, PatientSimProfile


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Settings for `telemgmt serve`; file values lose to CLI flags."""

    data_dir: str = "./gateway-data"
    host: str = "127.0.0.1"
    port: int = 8000
    admin_id: str = "ADM-0000"
    admin_secret: Optional[str] = None
    token_lifetime_s: float = 8 * 3600.0
    long_poll_max_s: float = 30.0
    sms_outbox: Optional[str] = None
    webhook_url: Optional[str] = None
    console_dir: Optional[str] = None

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}: unknown keys: {sorted(unknown)}")
        return cls(**doc)


@dataclass
class FleetPatient:
    principal_id: str
    secret: str
    profile: PatientSimProfile
    hub: Optional[HubConfig] = None


@dataclass
class FleetConfig:
    """A set of simulated patients for `telemgmt simulate`."""

    gateway: str
    hub: HubConfig = field(default_factory=HubConfig)
    patients: list = field(default_factory=list)

    @classmethod
    def load(cls, path: str | Path) -> "FleetConfig":
        try:
            doc = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read fleet config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
        try:
            default_hub = _hub_from_dict(doc.get("hub", {}))
            patients = []
            for entry in doc["patients"]:
                profile_doc = dict(entry["profile"])
                profile_doc.setdefault("patient_id", entry["id"])
                if profile_doc["patient_id"] != entry["id"]:
                    raise ConfigError(
                        f"{path}: profile patient_id {profile_doc['patient_id']!r} "
                        f"does not match entry id {entry['id']!r}")
                patients.append(FleetPatient(
                    principal_id=entry["id"],
                    secret=entry["secret"],
                    profile=PatientSimProfile.from_dict(profile_doc),
                    hub=(_hub_from_dict(entry["hub"])
                         if "hub" in entry else None),
                ))
            return cls(gateway=doc.get("gateway", ""), hub=default_hub,
                       patients=patients)
        except ConfigError:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: bad fleet config: {exc}") from exc


def _hub_from_dict(doc: dict) -> HubConfig:
    kwargs = dict(doc)
    if "outage_windows" in kwargs:
        kwargs["outage_windows"] = tuple(
            tuple(w) for w in kwargs["outage_windows"])
    return HubConfig(**kwargs)
