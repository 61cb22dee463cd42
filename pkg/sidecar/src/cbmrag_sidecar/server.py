"""HTTP server implementing the provider wire protocol.

Endpoints (all JSON bodies):

    POST /v1/embed/text  {"model", "inputs"}                    -> {"dim", "vectors"}
    POST /v1/embed/image {"model", "image_b64", "media_type"}   -> {"dim", "grid_h", "grid_w", "tokens"}
    POST /v1/transcribe  {"model", "media_b64", "media_type"}   -> {"text"}
    POST /v1/complete    {"model", "messages", "temperature", "max_tokens"} -> {"text"}

Backends are shared read-only; request parallelism is bounded by a semaphore
sized from config. Per-request failures return 5xx {"code", "message"};
backend load failures abort startup with a nonzero exit.
"""

import base64
import os
import sys
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

try:
    import tomllib
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .backends import BackendConfig, BackendError, load_backend


@dataclass
class SidecarConfig:
    host: str = "127.0.0.1"
    port: int = 8600
    max_parallel_requests: int = 4
    auth_token_env: str = ""  # when set, requests must carry this bearer token
    backend: BackendConfig = field(default_factory=BackendConfig)


def load_sidecar_config(path: str | Path | None) -> SidecarConfig:
    data = {}
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    backend = BackendConfig(**data.get("backend", {}))
    server = data.get("server", {})
    return SidecarConfig(
        host=server.get("host", "127.0.0.1"),
        port=server.get("port", 8600),
        max_parallel_requests=server.get("max_parallel_requests", 4),
        auth_token_env=server.get("auth_token_env", ""),
        backend=backend,
    )


class EmbedTextBody(BaseModel):
    model: str
    inputs: list[str]


class EmbedImageBody(BaseModel):
    model: str
    image_b64: str
    media_type: str


class TranscribeBody(BaseModel):
    model: str
    media_b64: str
    media_type: str


class CompleteMessage(BaseModel):
    role: str
    content: str


class CompleteBody(BaseModel):
    model: str
    messages: list[CompleteMessage]
    temperature: float = 0.0
    max_tokens: int = 1024


def error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"code": code, "message": message})


def create_app(config: SidecarConfig) -> FastAPI:
    backend = load_backend(config.backend)  # hardware/dependency check happens here
    gate = threading.BoundedSemaphore(config.max_parallel_requests)
    app = FastAPI(title="cbmrag-sidecar", version="0.1.0", docs_url=None, redoc_url=None)

    def check_auth(request: Request) -> JSONResponse | None:
        if not config.auth_token_env:
            return None
        expected = os.environ.get(config.auth_token_env, "")
        if not expected:
            return None
        header = request.headers.get("Authorization", "")
        if header != f"Bearer {expected}":
            return error(401, "unauthorized", "missing or invalid bearer token")
        return None

    @app.exception_handler(RequestValidationError)
    def handle_validation(request: Request, exc: RequestValidationError):
        return error(422, "invalid_request", str(exc.errors()[:3]))

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "backend": config.backend.name}

    @app.post("/v1/embed/text")
    def embed_text(body: EmbedTextBody, request: Request):
        if (denied := check_auth(request)) is not None:
            return denied
        if not body.inputs:
            return error(422, "invalid_request", "inputs must be non-empty")
        try:
            with gate:
                vectors = backend.embed_text(body.inputs)
        except Exception as exc:
            return error(500, "backend_failure", str(exc))
        return {"dim": len(vectors[0]), "vectors": vectors}

    @app.post("/v1/embed/image")
    def embed_image(body: EmbedImageBody, request: Request):
        if (denied := check_auth(request)) is not None:
            return denied
        if body.media_type not in ("image/png", "image/jpeg"):
            return error(415, "unsupported_media_type", f"unsupported {body.media_type!r}")
        try:
            image_bytes = base64.b64decode(body.image_b64, validate=True)
        except Exception:
            return error(422, "invalid_request", "image_b64 is not valid base64")
        try:
            with gate:
                grid_h, grid_w, tokens = backend.embed_image(image_bytes)
        except Exception as exc:
            return error(500, "backend_failure", str(exc))
        return {"dim": len(tokens[0]), "grid_h": grid_h, "grid_w": grid_w, "tokens": tokens}

    @app.post("/v1/transcribe")
    def transcribe(body: TranscribeBody, request: Request):
        if (denied := check_auth(request)) is not None:
            return denied
        if body.media_type not in ("audio/mpeg", "video/mp4"):
            return error(415, "unsupported_media_type", f"unsupported {body.media_type!r}")
        try:
            media_bytes = base64.b64decode(body.media_b64, validate=True)
        except Exception:
            return error(422, "invalid_request", "media_b64 is not valid base64")
        try:
            with gate:
                text = backend.transcribe(media_bytes)
        except Exception as exc:
            return error(500, "backend_failure", str(exc))
        return {"text": text}

    @app.post("/v1/complete")
    def complete(body: CompleteBody, request: Request):
        if (denied := check_auth(request)) is not None:
            return denied
        if not body.messages:
            return error(422, "invalid_request", "messages must be non-empty")
        for message in body.messages:
            if message.role not in ("system", "user", "assistant"):
                return error(422, "invalid_request", f"invalid role {message.role!r}")
        try:
            with gate:
                text = backend.complete(
                    [m.model_dump() for m in body.messages], body.temperature, body.max_tokens
                )
        except Exception as exc:
            return error(500, "backend_failure", str(exc))
        return {"text": text}

    return app


def main(argv: list[str] | None = None) -> None:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(description="cbmrag provider sidecar")
    parser.add_argument("--config", type=Path, default=None)
    args = parser.parse_args(argv)
    try:
        config = load_sidecar_config(args.config)
        app = create_app(config)
    except (BackendError, OSError, ValueError) as exc:
        print(f"startup failure: {exc}", file=sys.stderr)
        sys.exit(1)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")


if __name__ == "__main__":
    main()
