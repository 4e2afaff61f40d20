"""HTTP surface over the gateway core.

Thin by construction: parse, authenticate, delegate, serialise.  Every
error leaves as ``{"error": <code>, "detail": <text>}`` with the status
the protocol document pins, and a scheduled fault window turns the whole
surface into 503s, health endpoint included.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from fastapi import Depends, FastAPI, Header, Query, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..clock import Clock
from ..errors import ApiError, BadRequest
from ..store import CorruptLog, StorageUnavailable
from ..vitals import InvalidBounds, UnknownVitalKind
from .faults import FaultInjector
from .service import GatewayService


class LoginIn(BaseModel):
    id: str
    secret: str


class RegisterIn(BaseModel):
    role: str
    name: str
    assigned_staff: list = Field(default_factory=list)
    secret: Optional[str] = None


class IngestIn(BaseModel):
    device_id: str
    readings: list
    sent_at: Optional[str] = None


class BoundIn(BaseModel):
    low: int
    high: int
    unit: Optional[str] = None


class ThresholdsIn(BaseModel):
    bounds: dict


class SessionOpenIn(BaseModel):
    target_id: str
    mode: str


class MessageIn(BaseModel):
    kind: str
    payload: str


def create_app(service: GatewayService, clock: Clock,
               faults: Optional[FaultInjector] = None,
               console_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="telemgmt gateway", docs_url=None, redoc_url=None)

    @app.middleware("http")
    async def outage_gate(request: Request, call_next):
        if faults is not None and faults.is_down(clock.now()):
            return JSONResponse(status_code=503,
                                content={"error": "unavailable",
                                         "detail": "service outage"})
        return await call_next(request)

    @app.exception_handler(ApiError)
    async def api_error_handler(request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.http_status,
                            content={"error": exc.code, "detail": exc.detail})

    @app.exception_handler(InvalidBounds)
    async def bounds_handler(request: Request, exc: InvalidBounds):
        return JSONResponse(status_code=400,
                            content={"error": "invalid_bounds",
                                     "detail": str(exc)})

    @app.exception_handler(UnknownVitalKind)
    async def kind_handler(request: Request, exc: UnknownVitalKind):
        return JSONResponse(status_code=400,
                            content={"error": "unknown_kind",
                                     "detail": str(exc)})

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request,
                                 exc: RequestValidationError):
        return JSONResponse(status_code=400,
                            content={"error": "bad_request",
                                     "detail": str(exc.errors()[:3])})

    @app.exception_handler(StorageUnavailable)
    async def storage_handler(request: Request, exc: StorageUnavailable):
        return JSONResponse(status_code=503,
                            content={"error": "storage_unavailable",
                                     "detail": str(exc)})

    @app.exception_handler(CorruptLog)
    async def corrupt_handler(request: Request, exc: CorruptLog):
        return JSONResponse(status_code=500,
                            content={"error": "storage_corrupt",
                                     "detail": str(exc)})

    def current_principal(authorization: Optional[str] = Header(None)):
        token = None
        if authorization and authorization.startswith("Bearer "):
            token = authorization[len("Bearer "):]
        return service.authenticate(token)

    # -- unauthenticated ----------------------------------------------

    @app.get("/api/health")
    def health():
        return service.health()

    @app.post("/api/login")
    def login(body: LoginIn):
        return service.login(body.id, body.secret)

    # -- accounts ------------------------------------------------------

    @app.post("/api/principals", status_code=201)
    def register(body: RegisterIn, actor=Depends(current_principal)):
        return service.register(actor, body.role, body.name,
                                assigned_staff=body.assigned_staff,
                                secret=body.secret)

    @app.get("/api/principals")
    def principals(actor=Depends(current_principal)):
        return {"items": service.list_principals(actor)}

    # -- vitals --------------------------------------------------------

    @app.post("/api/patients/{patient_id}/vitals")
    def ingest(patient_id: str, body: IngestIn,
               actor=Depends(current_principal)):
        return service.ingest(actor, patient_id, body.device_id,
                              body.readings)

    @app.get("/api/patients/{patient_id}/vitals")
    def vitals(patient_id: str, actor=Depends(current_principal),
               after: int = Query(-1), device_id: Optional[str] = None,
               kind: Optional[str] = None, since: Optional[str] = None,
               limit: Optional[int] = None):
        try:
            return service.query_vitals(actor, patient_id, after=after,
                                        device_id=device_id, kind=kind,
                                        since=since, limit=limit)
        except ValueError as exc:
            raise BadRequest(str(exc)) from None

    @app.get("/api/patients/{patient_id}/thresholds")
    def get_thresholds(patient_id: str, actor=Depends(current_principal)):
        return service.get_thresholds(actor, patient_id)

    @app.put("/api/patients/{patient_id}/thresholds")
    def put_thresholds(patient_id: str, body: ThresholdsIn,
                       actor=Depends(current_principal)):
        return service.update_thresholds(actor, patient_id, body.bounds)

    # -- alerts --------------------------------------------------------

    @app.get("/api/alerts")
    def alerts(actor=Depends(current_principal),
               state: Optional[str] = None,
               patient_id: Optional[str] = None):
        return {"items": service.list_alerts(actor, state=state,
                                             patient_id=patient_id)}

    @app.post("/api/alerts/{alert_id}/ack")
    def ack(alert_id: str, actor=Depends(current_principal)):
        return service.acknowledge_alert(actor, alert_id)

    # -- sessions ------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    def open_session(body: SessionOpenIn, actor=Depends(current_principal)):
        return service.open_session(actor, body.target_id, body.mode)

    @app.get("/api/sessions")
    def sessions(actor=Depends(current_principal)):
        return {"items": service.list_sessions(actor)}

    @app.post("/api/sessions/{session_id}/accept")
    def accept(session_id: str, actor=Depends(current_principal)):
        return service.accept_session(actor, session_id)

    @app.post("/api/sessions/{session_id}/messages")
    def post_message(session_id: str, body: MessageIn,
                     actor=Depends(current_principal)):
        return service.post_message(actor, session_id, body.kind,
                                    body.payload)

    @app.get("/api/sessions/{session_id}/events")
    def events(session_id: str, actor=Depends(current_principal),
               after: int = Query(-1), wait: float = Query(0.0)):
        return service.fetch_events(actor, session_id, after=after,
                                    wait_s=wait)

    @app.post("/api/sessions/{session_id}/terminate")
    def terminate(session_id: str, actor=Depends(current_principal)):
        return service.terminate_session(actor, session_id)

    # -- objects -------------------------------------------------------

    @app.post("/api/objects", status_code=201)
    async def put_object(request: Request, actor=Depends(current_principal)):
        data = await request.body()
        return service.put_object(actor, data)

    @app.get("/api/objects/{ref}")
    def get_object(ref: str, actor=Depends(current_principal)):
        data = service.get_object(actor, ref)
        return Response(content=data, media_type="application/octet-stream")

    # -- observability -------------------------------------------------

    @app.get("/api/metrics/reliability")
    def metrics(actor=Depends(current_principal)):
        return service.reliability_metrics(actor)

    @app.get("/api/audit")
    def audit(actor=Depends(current_principal), after: int = Query(-1),
              limit: int = Query(500)):
        return service.read_audit(actor, after=after, limit=limit)

    if console_dir and Path(console_dir).is_dir():
        app.mount("/", StaticFiles(directory=console_dir, html=True),
                  name="console")

    return app
