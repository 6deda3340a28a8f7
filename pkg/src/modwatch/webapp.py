"""HTTP/JSON surface over the review service.

All responses are JSON; errors come back as {"code", "message"} with a
4xx/5xx status. Auth is a single optional static token (X-Auth-Token).
The mutating endpoints funnel into the service's single-writer lock.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .service import ModerationService, ServiceError

_ERROR_STATUS = {
    "not_found": 404,
    "conflict": 409,
    "bad_decision": 422,
    "bad_event": 422,
    "single_class": 409,
    "no_model": 503,
    "unauthorized": 401,
}


class LabelBody(BaseModel):
    subreddit: str
    decision: str
    actor: str
    month: str | None = None


class CycleBody(BaseModel):
    month: str


def create_app(
    service: ModerationService,
    auth_token: str = "",
    static_dir: str | Path | None = None,
) -> FastAPI:
    app = FastAPI(title="modwatch review service")

    @app.exception_handler(ServiceError)
    async def service_error_handler(_req: Request, exc: ServiceError):
        return JSONResponse(
            status_code=_ERROR_STATUS.get(exc.code, 400),
            content={"code": exc.code, "message": exc.message},
        )

    @app.middleware("http")
    async def check_token(request: Request, call_next):
        if auth_token and request.url.path.startswith(("/flags", "/communities", "/labels", "/retrain", "/model", "/metrics", "/cycle")):
            if request.headers.get("x-auth-token") != auth_token:
                return JSONResponse(
                    status_code=401,
                    content={"code": "unauthorized", "message": "missing or bad token"},
                )
        return await call_next(request)

    @app.get("/health")
    def health():
        return {"ok": True, "model_version": service.model_version}

    @app.get("/flags")
    def flags(status: str | None = None):
        return {"items": [item.to_dict() for item in service.flags(status)]}

    @app.get("/communities/{name}")
    def dossier(name: str, month: str | None = None):
        return service.dossier(name, month)

    @app.post("/labels")
    def labels(body: LabelBody):
        result = service.submit_label(body.subreddit, body.decision, body.actor, body.month)
        return {
            "item": result["item"].to_dict(),
            "outcome": result["outcome"],
            "training_delta": result["training_delta"],
        }

    @app.post("/retrain")
    def retrain():
        return service.retrain()

    @app.post("/cycle")
    def cycle(body: CycleBody):
        items = service.flag_cycle(body.month)
        return {"month": body.month, "items": [item.to_dict() for item in items]}

    @app.get("/model")
    def model():
        return service.model_info()

    @app.get("/metrics")
    def metrics():
        return service.metrics()

    if static_dir and Path(static_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
