"""Service-level errors shared by the gateway core and its HTTP surface.

Each error carries the wire code and HTTP status the protocol document
freezes; the HTTP layer maps them mechanically.
"""

from __future__ import annotations


class ApiError(Exception):
    code = "error"
    http_status = 400

    def __init__(self, detail: str = ""):
        super().__init__(detail or self.code)
        self.detail = detail


class Unauthorized(ApiError):
    code = "unauthorized"
    http_status = 401


class Forbidden(ApiError):
    code = "forbidden"
    http_status = 403


class NotFound(ApiError):
    code = "not_found"
    http_status = 404


class Conflict(ApiError):
    code = "conflict"
    http_status = 409


class InvalidTransition(ApiError):
    code = "invalid_transition"
    http_status = 409


class SessionNotActive(ApiError):
    code = "not_active"
    http_status = 409


class SessionClosed(ApiError):
    code = "session_closed"
    http_status = 409


class PayloadTooLarge(ApiError):
    code = "payload_too_large"
    http_status = 413


class BadRequest(ApiError):
    code = "bad_request"
    http_status = 400
