"""Accounts, secrets, bearer tokens and the role permission table.

The permission table is plain data with a deny default.  Every gateway
operation names one action key; tests sweep the full (role, action)
product against this same table, so the enforced policy and the
documented policy cannot drift apart.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import threading
from dataclasses import dataclass, field
from datetime import datetime, timedelta
from enum import Enum
from typing import Optional

from ..errors import Forbidden, Unauthorized

PBKDF2_ITERATIONS = 60_000


class Role(str, Enum):
    PATIENT = "patient"
    MEDICAL_EXPERT = "medical_expert"
    ADMINISTRATOR = "administrator"

    @classmethod
    def parse(cls, raw: str) -> "Role":
        try:
            return cls(raw)
        except ValueError:
            raise ValueError(f"unknown role: {raw!r}") from None


@dataclass(frozen=True)
class Principal:
    principal_id: str
    role: Role
    name: str
    secret_hash: str
    created_at: datetime
    assigned_staff: tuple = ()

    def public_dict(self) -> dict:
        # never exposes the secret hash
        return {
            "id": self.principal_id,
            "role": self.role.value,
            "name": self.name,
            "created_at": self.created_at.isoformat(),
            "assigned_staff": list(self.assigned_staff),
        }


def hash_secret(secret: str, salt: Optional[bytes] = None) -> str:
    if salt is None:
        salt = secrets.token_bytes(16)
    digest = hashlib.pbkdf2_hmac("sha256", secret.encode("utf-8"), salt,
                                 PBKDF2_ITERATIONS)
    return f"pbkdf2-sha256${PBKDF2_ITERATIONS}${salt.hex()}${digest.hex()}"


def verify_secret(secret: str, stored: str) -> bool:
    try:
        scheme, iters, salt_hex, digest_hex = stored.split("$")
        if scheme != "pbkdf2-sha256":
            return False
        digest = hashlib.pbkdf2_hmac("sha256", secret.encode("utf-8"),
                                     bytes.fromhex(salt_hex), int(iters))
        return hmac.compare_digest(digest.hex(), digest_hex)
    except (ValueError, AttributeError):
        return False


@dataclass(frozen=True)
class Token:
    value: str
    principal_id: str
    issued_at: datetime
    expires_at: datetime


class TokenTable:
    """Server-side bearer token registry; tokens are opaque and expire."""

    def __init__(self):
        self._lock = threading.Lock()
        self._by_value: dict = {}

    def issue(self, principal_id: str, now: datetime,
              lifetime_s: float) -> Token:
        token = Token(
            value=secrets.token_urlsafe(32),
            principal_id=principal_id,
            issued_at=now,
            expires_at=now + timedelta(seconds=lifetime_s),
        )
        with self._lock:
            self._by_value[token.value] = token
        return token

    def resolve(self, value: str, now: datetime) -> str:
        """Map a presented token to its principal id or raise Unauthorized."""
        with self._lock:
            token = self._by_value.get(value)
            if token is None:
                raise Unauthorized("unknown token")
            if now >= token.expires_at:
                del self._by_value[value]
                raise Unauthorized("token expired")
            return token.principal_id

    def revoke_for(self, principal_id: str) -> int:
        with self._lock:
            stale = [v for v, t in self._by_value.items()
                     if t.principal_id == principal_id]
            for v in stale:
                del self._by_value[v]
            return len(stale)


ALLOW = "allow"
OWN = "own"   # permitted only when the target patient is the caller
DENY = "deny"

# action -> role -> rule.  Missing entries deny.  Administrators manage
# accounts and observe system health but have no clinical data access.
PERMISSIONS = {
    "register_principal": {Role.ADMINISTRATOR: ALLOW},
    "list_principals": {Role.PATIENT: ALLOW, Role.MEDICAL_EXPERT: ALLOW,
                        Role.ADMINISTRATOR: ALLOW},
    "ingest_vitals": {Role.PATIENT: OWN, Role.MEDICAL_EXPERT: ALLOW},
    "read_vitals": {Role.PATIENT: OWN, Role.MEDICAL_EXPERT: ALLOW},
    "read_thresholds": {Role.PATIENT: OWN, Role.MEDICAL_EXPERT: ALLOW},
    "write_thresholds": {Role.MEDICAL_EXPERT: ALLOW},
    "list_alerts": {Role.MEDICAL_EXPERT: ALLOW},
    "ack_alert": {Role.MEDICAL_EXPERT: ALLOW},
    "open_session": {Role.PATIENT: ALLOW, Role.MEDICAL_EXPERT: ALLOW},
    "session_ops": {Role.PATIENT: ALLOW, Role.MEDICAL_EXPERT: ALLOW},
    "put_object": {Role.PATIENT: ALLOW, Role.MEDICAL_EXPERT: ALLOW},
    "get_object": {Role.PATIENT: ALLOW, Role.MEDICAL_EXPERT: ALLOW},
    "read_metrics": {Role.MEDICAL_EXPERT: ALLOW, Role.ADMINISTRATOR: ALLOW},
    "read_audit": {Role.ADMINISTRATOR: ALLOW},
}

ACTIONS = tuple(sorted(PERMISSIONS))


def authorize(principal: Principal, action: str,
              target_patient: Optional[str] = None) -> None:
    """Raise Forbidden unless the table allows the action for this caller."""
    if action not in PERMISSIONS:
        raise Forbidden(f"unknown action: {action}")
    rule = PERMISSIONS[action].get(principal.role, DENY)
    if rule == ALLOW:
        return
    if rule == OWN:
        if target_patient is not None and target_patient == principal.principal_id:
            return
        raise Forbidden(f"{principal.role.value} may only act on own records")
    raise Forbidden(f"{principal.role.value} may not {action}")
