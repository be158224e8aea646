"""HTTP service over anonymization sessions.

Sessions live in memory only and every payload is JSON. Datasets arrive as
a multipart upload (delimited text plus a schema document) and never touch
disk. Malformed input is a 400, an unknown session a 404, and a commit that
races another commit on the same session a 409.
"""

from __future__ import annotations

import io
import json
from typing import Any

from fastapi import Body, FastAPI, File, Form, UploadFile
from fastapi.responses import JSONResponse

from .attack import PolicyThresholds, preset
from .model import DeidentError, Role, load_dataset, schema_from_json
from .pipeline import ConflictError, Session, SessionRegistry
from .transforms import TransformStep


class ServiceError(DeidentError):
    def __init__(self, status: int, message: str):
        super().__init__(message)
        self.status = status


def _parse_step(doc: Any) -> TransformStep:
    if not isinstance(doc, dict):
        raise ServiceError(400, "request body must be a JSON transform step object")
    return TransformStep.from_json(doc)


def create_app(registry: SessionRegistry | None = None) -> FastAPI:
    registry = registry if registry is not None else SessionRegistry()
    app = FastAPI(title="deident", docs_url=None, redoc_url=None)
    app.state.registry = registry

    @app.exception_handler(ServiceError)
    async def handle_service_error(request, exc: ServiceError):
        return JSONResponse(status_code=exc.status, content={"detail": str(exc)})

    @app.exception_handler(ConflictError)
    async def handle_conflict(request, exc: ConflictError):
        return JSONResponse(status_code=409, content={"detail": str(exc)})

    @app.exception_handler(DeidentError)
    async def handle_domain_error(request, exc: DeidentError):
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    def session_or_404(session_id: str) -> Session:
        if not registry.has(session_id):
            raise ServiceError(404, f"no session with id {session_id!r}")
        return registry.get(session_id)

    @app.post("/sessions", status_code=201)
    async def create_session(
        data: UploadFile = File(...),
        schema_file: UploadFile = File(..., alias="schema"),
        policy: str = Form("open-release"),
        tau: int = Form(5),
        quasi: str | None = Form(None),
        label: str = Form(""),
    ) -> dict[str, Any]:
        try:
            schema_doc = json.loads((await schema_file.read()).decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ServiceError(400, f"schema is not valid JSON: {exc}") from None
        attributes = schema_from_json(schema_doc)
        try:
            text = (await data.read()).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ServiceError(400, f"dataset is not valid UTF-8: {exc}") from None
        dataset = load_dataset(io.StringIO(text), attributes, provenance=data.filename or "upload")
        if policy.lstrip().startswith("{"):
            policy_obj = PolicyThresholds.from_json(json.loads(policy))
        else:
            policy_obj = preset(policy)
        if quasi:
            quasi_names = [q.strip() for q in quasi.split(",") if q.strip()]
        else:
            quasi_names = [a.name for a in dataset.schema if a.role is Role.QUASI]
        if not quasi_names:
            raise ServiceError(
                400,
                "schema declares no quasi-identifiers and none were passed "
                "in the quasi field",
            )
        session = registry.create(
            dataset, quasi_names, policy_obj, tau=tau, label=label
        )
        return session.to_json()

    @app.get("/sessions")
    async def list_sessions() -> dict[str, Any]:
        return {"sessions": [s.to_json() for s in registry.list()]}

    @app.get("/sessions/{session_id}/report")
    async def report(
        session_id: str, tau: int | None = None, k: int | None = None
    ) -> dict[str, Any]:
        return session_or_404(session_id).report(tau=tau, k=k).to_json()

    @app.get("/sessions/{session_id}/histogram")
    async def histogram(session_id: str) -> dict[str, Any]:
        session = session_or_404(session_id)
        hist = session.histogram()
        return {
            "record_count": session.committed.record_count,
            "class_count": sum(hist.values()),
            "histogram": [
                {"size": size, "classes": count} for size, count in hist.items()
            ],
        }

    @app.post("/sessions/{session_id}/whatif")
    async def whatif(session_id: str, step: Any = Body(...)) -> dict[str, Any]:
        session = session_or_404(session_id)
        return session.whatif(_parse_step(step)).to_json()

    @app.post("/sessions/{session_id}/commit")
    async def commit(session_id: str, step: Any = Body(...)) -> dict[str, Any]:
        session = session_or_404(session_id)
        entry = session.commit(_parse_step(step))
        return {"entry": entry.to_json(), "report": session.report().to_json()}

    @app.get("/sessions/{session_id}/ledger")
    async def ledger(session_id: str) -> dict[str, Any]:
        return {"entries": session_or_404(session_id).ledger.to_json()}

    @app.get("/sessions/{session_id}/utility")
    async def utility(session_id: str) -> dict[str, Any]:
        return session_or_404(session_id).utility().to_json()

    return app
