"""Central gateway: accounts, vital ingestion, alerting, sessions, HTTP API."""

from .auth import PERMISSIONS, Principal, Role, authorize
from .service import GatewayConfig, GatewayService

__all__ = [
    "PERMISSIONS",
    "Principal",
    "Role",
    "authorize",
    "GatewayConfig",
    "GatewayService",
]
