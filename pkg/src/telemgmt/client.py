"""Typed client for the gateway's HTTP API.

Works against any httpx-compatible client object, which includes the
in-process ASGI test client, so hubs, probes and tests all share this one
code path.
"""

from __future__ import annotations

from typing import Optional

import httpx


class GatewayError(Exception):
    """Non-2xx API response, carrying the wire error code."""

    def __init__(self, status_code: int, code: str, detail: str = ""):
        super().__init__(f"[{status_code}] {code}: {detail}")
        self.status_code = status_code
        self.code = code
        self.detail = detail


class GatewayClient:
    def __init__(self, base_url: str = "",
                 http: Optional[httpx.Client] = None,
                 token: Optional[str] = None,
                 timeout: float = 35.0):
        # timeout leaves headroom for the server's 30 s long-poll cap
        self._http = http or httpx.Client(base_url=base_url, timeout=timeout)
        self.token = token

    def close(self) -> None:
        self._http.close()

    # -- plumbing ------------------------------------------------------

    def _headers(self) -> dict:
        if self.token:
            return {"Authorization": f"Bearer {self.token}"}
        return {}

    def _unwrap(self, resp: httpx.Response):
        if resp.status_code // 100 == 2:
            if resp.headers.get("content-type", "").startswith("application/json"):
                return resp.json()
            return resp.content
        try:
            body = resp.json()
            code, detail = body.get("error", "error"), body.get("detail", "")
        except ValueError:
            code, detail = "error", resp.text[:200]
        raise GatewayError(resp.status_code, code, detail)

    def _get(self, path: str, **params):
        clean = {k: v for k, v in params.items() if v is not None}
        return self._unwrap(self._http.get(path, params=clean,
                                           headers=self._headers()))

    def _post(self, path: str, body: Optional[dict] = None, **kwargs):
        return self._unwrap(self._http.post(path, json=body,
                                            headers=self._headers(), **kwargs))

    # -- auth ----------------------------------------------------------

    def login(self, principal_id: str, secret: str) -> dict:
        out = self._post("/api/login", {"id": principal_id, "secret": secret})
        self.token = out["token"]
        return out

    def register(self, role: str, name: str,
                 assigned_staff: Optional[list] = None,
                 secret: Optional[str] = None) -> dict:
        return self._post("/api/principals", {
            "role": role, "name": name,
            "assigned_staff": assigned_staff or [], "secret": secret,
        })

    def principals(self) -> list:
        return self._get("/api/principals")["items"]

    # -- vitals --------------------------------------------------------

    def ingest(self, patient_id: str, device_id: str,
               readings: list) -> dict:
        return self._post(f"/api/patients/{patient_id}/vitals",
                          {"device_id": device_id, "readings": readings})

    def vitals(self, patient_id: str, *, after: int = -1,
               device_id: Optional[str] = None, kind: Optional[str] = None,
               since: Optional[str] = None,
               limit: Optional[int] = None) -> dict:
        return self._get(f"/api/patients/{patient_id}/vitals", after=after,
                         device_id=device_id, kind=kind, since=since,
                         limit=limit)

    def get_thresholds(self, patient_id: str) -> dict:
        return self._get(f"/api/patients/{patient_id}/thresholds")

    def put_thresholds(self, patient_id: str, bounds: dict) -> dict:
        return self._unwrap(self._http.put(
            f"/api/patients/{patient_id}/thresholds",
            json={"bounds": bounds}, headers=self._headers()))

    # -- alerts --------------------------------------------------------

    def alerts(self, *, state: Optional[str] = None,
               patient_id: Optional[str] = None) -> list:
        return self._get("/api/alerts", state=state,
                         patient_id=patient_id)["items"]

    def ack(self, alert_id: str) -> dict:
        return self._post(f"/api/alerts/{alert_id}/ack")

    # -- sessions ------------------------------------------------------

    def open_session(self, target_id: str, mode: str) -> dict:
        return self._post("/api/sessions",
                          {"target_id": target_id, "mode": mode})

    def sessions(self) -> list:
        return self._get("/api/sessions")["items"]

    def accept_session(self, session_id: str) -> dict:
        return self._post(f"/api/sessions/{session_id}/accept")

    def post_message(self, session_id: str, kind: str, payload: str) -> dict:
        return self._post(f"/api/sessions/{session_id}/messages",
                          {"kind": kind, "payload": payload})

    def events(self, session_id: str, *, after: int = -1,
               wait: float = 0.0) -> dict:
        return self._get(f"/api/sessions/{session_id}/events",
                         after=after, wait=wait)

    def terminate_session(self, session_id: str) -> dict:
        return self._post(f"/api/sessions/{session_id}/terminate")

    # -- objects -------------------------------------------------------

    def put_object(self, data: bytes) -> dict:
        return self._unwrap(self._http.post(
            "/api/objects", content=data,
            headers={**self._headers(),
                     "content-type": "application/octet-stream"}))

    def get_object(self, ref: str) -> bytes:
        return self._get(f"/api/objects/{ref}")

    # -- observability -------------------------------------------------

    def health(self) -> dict:
        return self._get("/api/health")

    def is_healthy(self) -> bool:
        """Probe predicate: True iff the gateway answers OK right now."""
        try:
            return self.health().get("status") == "ok"
        except (GatewayError, httpx.HTTPError):
            return False

    def reliability_metrics(self) -> dict:
        return self._get("/api/metrics/reliability")

    def audit(self, *, after: int = -1, limit: int = 500) -> dict:
        return self._get("/api/audit", after=after, limit=limit)
