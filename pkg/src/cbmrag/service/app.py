"""HTTP layer: routes, error mapping, and the app factory.

Error bodies are always {"code": <machine string>, "message": <human string>}
with codes drawn from a closed set (see ERROR_MAP plus invalid_request and
internal_error).
"""

import logging

from fastapi import FastAPI, Form, Request, Response, UploadFile
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from ..errors import (
    CbmRagError,
    DuplicateDocument,
    MalformedReport,
    NoAnalysis,
    ProviderError,
    ScoreOutOfRange,
    StorageFailure,
    UnknownConcept,
    UnknownSession,
    UnsupportedMediaType,
)
from .heatmap import MAX_DIMENSION
from .pipeline import AppState

logger = logging.getLogger(__name__)

DEFAULT_HEATMAP_SIZE = 448

# exception class -> (http status, machine code); order matters (subclasses first)
ERROR_MAP: list[tuple[type, int, str]] = [
    (UnknownSession, 404, "unknown_session"),
    (UnknownConcept, 404, "unknown_concept"),
    (NoAnalysis, 409, "no_analysis"),
    (DuplicateDocument, 409, "duplicate_document"),
    (ScoreOutOfRange, 422, "score_out_of_range"),
    (UnsupportedMediaType, 415, "unsupported_media_type"),
    (MalformedReport, 502, "malformed_report"),
    (ProviderError, 502, "remote_unavailable"),
    (StorageFailure, 500, "internal_error"),
]


class ChatBody(BaseModel):
    message: str


class OverridesBody(BaseModel):
    overrides: dict[str, float]


def error_response(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="cbmrag", version="0.1.0", docs_url=None, redoc_url=None)

    @app.exception_handler(CbmRagError)
    def handle_domain_error(request: Request, exc: CbmRagError):
        for cls, status, code in ERROR_MAP:
            if isinstance(exc, cls):
                return error_response(status, code, str(exc))
        logger.exception("unmapped domain error", exc_info=exc)
        return error_response(500, "internal_error", str(exc))

    @app.exception_handler(RequestValidationError)
    def handle_validation_error(request: Request, exc: RequestValidationError):
        return error_response(422, "invalid_request", str(exc.errors()[:3]))

    @app.exception_handler(StarletteHTTPException)
    def handle_http_error(request: Request, exc: StarletteHTTPException):
        # unmatched routes etc. keep the documented {code, message} shape
        code = "invalid_request" if exc.status_code < 500 else "internal_error"
        return error_response(exc.status_code, code, str(exc.detail))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/v1/sessions", status_code=201)
    def create_session():
        session = state.sessions.create()
        return state.session_payload(session)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return state.session_payload(state.sessions.get(session_id))

    @app.post("/v1/sessions/{session_id}/image")
    def analyze_image(session_id: str, file: UploadFile):
        image_bytes = file.file.read()
        media_type = file.content_type or "application/octet-stream"
        return state.analyze_image(session_id, image_bytes, media_type)

    @app.get("/v1/sessions/{session_id}/heatmaps/{concept_id}")
    def get_heatmap(
        session_id: str,
        concept_id: str,
        w: int = DEFAULT_HEATMAP_SIZE,
        h: int = DEFAULT_HEATMAP_SIZE,
    ):
        if not (1 <= w <= MAX_DIMENSION and 1 <= h <= MAX_DIMENSION):
            return error_response(
                422, "invalid_request", f"w and h must be in [1, {MAX_DIMENSION}]"
            )
        png = state.get_heatmap(session_id, concept_id, w, h)
        return Response(content=png, media_type="image/png")

    @app.patch("/v1/sessions/{session_id}/concepts")
    def update_concepts(session_id: str, body: OverridesBody):
        return state.update_concepts(session_id, body.overrides)

    @app.post("/v1/sessions/{session_id}/uploads")
    def ingest_upload(session_id: str, file: UploadFile, doc_id: str | None = Form(None)):
        file_bytes = file.file.read()
        media_type = file.content_type or "application/octet-stream"
        resolved_doc_id = doc_id or file.filename or "upload"
        count = state.ingest_upload(session_id, file_bytes, media_type, resolved_doc_id)
        return {"session_id": session_id, "doc_id": resolved_doc_id, "chunks_added": count}

    @app.post("/v1/sessions/{session_id}/report")
    def generate_report(session_id: str):
        return state.generate_report(session_id)

    @app.post("/v1/sessions/{session_id}/chat")
    def chat_message(session_id: str, body: ChatBody):
        if not body.message.strip():
            return error_response(422, "invalid_request", "message must be non-empty")
        return state.chat_message(session_id, body.message)

    @app.get("/v1/sessions/{session_id}/debug/prompt")
    def debug_prompt(session_id: str):
        session = state.sessions.get(session_id)
        turns = session.last_chat_prompt or []
        return {"turns": [{"role": m.role, "content": m.content} for m in turns]}

    return app


def create_app_from_config(config) -> FastAPI:
    return create_app(AppState(config))
