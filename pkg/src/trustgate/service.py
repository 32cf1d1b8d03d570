"""JSON HTTP service over the decision engine.

Endpoints: POST /v1/decide (evaluates and audits), POST /v1/score (scoring
only, no side effects), GET /v1/audit (range read), GET /v1/health.
Responses are rendered through the canonical serializer, so /v1/score
bodies are byte-identical to library output. Schema violations return 400
with the field path, out-of-range values 422; unexpected failures return
an opaque error id and log the detail server-side.
"""

from __future__ import annotations

import logging
import secrets
import time

from fastapi import FastAPI, Request
from fastapi.responses import Response

from .audit import AuditLog
from .config import ServiceConfig, build_engine, open_audit_log
from .engine import DecisionEngine
from .scoring import ScoringError
from .validation import (
    KIND_RANGE,
    ValidationError,
    validate_decide_body,
    validate_score_body,
)
from .wire import decision_to_wire, render, scores_to_wire, sha256_hex

logger = logging.getLogger(__name__)


def _json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=render(payload), status_code=status_code, media_type="application/json"
    )


def _error_response(status_code: int, kind: str, message: str, path: str | None = None) -> Response:
    error: dict = {"kind": kind, "message": message}
    if path is not None:
        error["path"] = path
    return _json_response({"error": error}, status_code)


def create_app(
    config: ServiceConfig,
    engine: DecisionEngine | None = None,
    audit: AuditLog | None = None,
) -> FastAPI:
    engine = engine if engine is not None else build_engine(config)
    audit = audit if audit is not None else open_audit_log(config)
    app = FastAPI(title="trustgate", docs_url=None, redoc_url=None, openapi_url=None)
    app.state.engine = engine
    app.state.audit = audit
    app.state.config = config

    async def _parse_body(request: Request):
        try:
            return await request.json()
        except Exception:
            raise ValidationError("body", "request body is not valid JSON")

    @app.exception_handler(ValidationError)
    async def _on_validation_error(_request, exc: ValidationError):
        status = 422 if exc.kind == KIND_RANGE else 400
        return _error_response(status, exc.kind, str(exc), exc.path)

    @app.exception_handler(Exception)
    async def _on_unexpected(_request, exc: Exception):
        error_id = secrets.token_hex(8)
        logger.exception("internal error %s", error_id)
        return _json_response({"error": {"kind": "internal", "id": error_id}}, 500)

    @app.get("/v1/health")
    async def health():
        return _json_response({"status": "ok", "audit_sequence": audit.sequence})

    @app.post("/v1/decide")
    async def decide(request: Request):
        raw = await _parse_body(request)
        body = validate_decide_body(
            raw, engine.scoring_config, engine.thresholds, engine.resources
        )
        thresholds = body.thresholds or engine.thresholds
        decision = engine.evaluate(
            body.request,
            resources=body.resources,
            scoring_config=body.scoring,
            thresholds=thresholds,
        )
        payload = decision_to_wire(decision, thresholds.ct)
        audit.append(
            {
                "timestamp": int(time.time()),
                "request_digest": sha256_hex(raw),
                "status": decision.status,
                "context_array": decision.context_array,
                "f1": decision.fields.f1_level,
                "f2": decision.fields.f2_resources,
                "f3": decision.fields.f3_constraints,
                "f4": decision.fields.f4_operations,
                "scores": {
                    "ct": None if decision.ct is None else float(decision.ct),
                    "bt": (
                        float(decision.scores.bond.bt)
                        if decision.scores is not None and decision.scores.bond is not None
                        else None
                    ),
                },
            }
        )
        return _json_response(payload)

    @app.post("/v1/score")
    async def score(request: Request):
        raw = await _parse_body(request)
        body = validate_score_body(raw, engine.scoring_config)
        try:
            scores = engine.score(
                body.triple,
                list(body.history),
                body.candidate_report,
                body.checks,
                scoring_config=body.scoring,
            )
        except ScoringError as exc:
            return _error_response(422, "scoring", str(exc), exc.stage)
        return _json_response(scores_to_wire(scores, engine.thresholds.ct))

    @app.get("/v1/audit")
    async def audit_range(request: Request):
        params = request.query_params
        try:
            start = int(params.get("from", 1))
            end = int(params.get("to", audit.sequence))
        except ValueError:
            raise ValidationError("query", "from/to must be integers")
        return _json_response({"entries": audit.read_range(start, end)})

    return app
