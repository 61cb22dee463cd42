"""HTTP+JSON client for remote neural providers.

Wire protocol (all bodies UTF-8 JSON, bearer auth from a configured env var):

    POST /v1/embed/text  {"model", "inputs"}                    -> {"dim", "vectors"}
    POST /v1/embed/image {"model", "image_b64", "media_type"}   -> {"dim", "grid_h", "grid_w", "tokens"}
    POST /v1/transcribe  {"model", "media_b64", "media_type"}   -> {"text"}
    POST /v1/complete    {"model", "messages", "temperature", "max_tokens"} -> {"text"}

Non-2xx responses and transport errors are retried with exponential backoff
(base 0.5 s, factor 2); a provider that always fails is called exactly
max_retries + 1 times before RemoteUnavailable is raised.
"""

import base64
import hashlib
import logging
import os
import time
from typing import Callable, Sequence

import httpx

from ..errors import (
    DimensionMismatch,
    EmptyInput,
    MalformedResponse,
    RemoteUnavailable,
    UnsupportedMediaType,
)
from .types import (
    AUDIO_VIDEO_MEDIA_TYPES,
    ChatMessage,
    EmbeddingVector,
    IMAGE_MEDIA_TYPES,
    ImageTokenEmbeddings,
    ProviderConfig,
    TranscriptionResult,
    VALID_ROLES,
)

logger = logging.getLogger(__name__)


class HttpProvider:
    """One configured remote endpoint exposing any of the four capabilities."""

    def __init__(
        self,
        config: ProviderConfig,
        transport: httpx.BaseTransport | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.config = config
        self._sleep = sleep
        self._client = httpx.Client(
            base_url=config.endpoint,
            timeout=config.timeout,
            transport=transport,
        )
        self._seen_dim: int | None = None  # dimension coherence across calls

    def close(self) -> None:
        self._client.close()

    # -- wire plumbing -------------------------------------------------------

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_token_env:
            token = os.environ.get(self.config.auth_token_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _post(self, path: str, payload: dict) -> dict:
        attempts = self.config.max_retries + 1
        last_error = ""
        for attempt in range(attempts):
            if attempt:
                self._sleep(self.config.backoff_base * self.config.backoff_factor ** (attempt - 1))
            try:
                response = self._client.post(path, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last_error = f"transport error: {exc}"
                logger.warning("provider call %s failed (attempt %d/%d): %s",
                               path, attempt + 1, attempts, last_error)
                continue
            if 200 <= response.status_code < 300:
                try:
                    body = response.json()
                except ValueError as exc:
                    raise MalformedResponse(f"{path}: response is not JSON: {exc}") from exc
                if not isinstance(body, dict):
                    raise MalformedResponse(f"{path}: expected a JSON object")
                return body
            last_error = f"HTTP {response.status_code}"
            logger.warning("provider call %s failed (attempt %d/%d): %s",
                           path, attempt + 1, attempts, last_error)
        raise RemoteUnavailable(
            f"{self.config.endpoint}{path} unavailable after {attempts} attempts ({last_error})"
        )

    def _check_dim(self, dim: int) -> None:
        if self._seen_dim is None:
            self._seen_dim = dim
        elif dim != self._seen_dim:
            raise DimensionMismatch(
                f"provider dimension drifted from {self._seen_dim} to {dim} within one run"
            )

    # -- capabilities ---------------------------------------------------------

    def embed_text(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if len(texts) == 0:
            raise EmptyInput("embed_text requires at least one input string")
        for i, text in enumerate(texts):
            if not text.strip():
                raise EmptyInput(f"input {i} is empty after trimming")
        body = self._post(
            "/v1/embed/text", {"model": self.config.model_name, "inputs": list(texts)}
        )
        dim, vectors = body.get("dim"), body.get("vectors")
        if not isinstance(dim, int) or not isinstance(vectors, list):
            raise MalformedResponse("embed/text: missing or mistyped 'dim'/'vectors'")
        if len(vectors) != len(texts):
            raise MalformedResponse(
                f"embed/text: expected {len(texts)} vectors, got {len(vectors)}"
            )
        for vec in vectors:
            if not isinstance(vec, list) or len(vec) != dim:
                raise DimensionMismatch(
                    f"embed/text: vector length {len(vec) if isinstance(vec, list) else '?'}"
                    f" != declared dim {dim}"
                )
        self._check_dim(dim)
        try:
            return [EmbeddingVector(tuple(float(v) for v in vec)) for vec in vectors]
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"embed/text: bad vector payload: {exc}") from exc

    def embed_image(self, image_bytes: bytes, media_type: str) -> ImageTokenEmbeddings:
        if media_type not in IMAGE_MEDIA_TYPES:
            raise UnsupportedMediaType(
                f"media type {media_type!r} not supported; expected one of "
                f"{sorted(IMAGE_MEDIA_TYPES)}"
            )
        if not image_bytes:
            raise EmptyInput("image bytes must be non-empty")
        body = self._post(
            "/v1/embed/image",
            {
                "model": self.config.model_name,
                "image_b64": base64.b64encode(image_bytes).decode("ascii"),
                "media_type": media_type,
            },
        )
        dim, grid_h, grid_w = body.get("dim"), body.get("grid_h"), body.get("grid_w")
        tokens = body.get("tokens")
        if not all(isinstance(v, int) for v in (dim, grid_h, grid_w)) or not isinstance(tokens, list):
            raise MalformedResponse("embed/image: missing or mistyped fields")
        if grid_h < 1 or grid_w < 1 or len(tokens) != grid_h * grid_w:
            raise MalformedResponse(
                f"embed/image: token count {len(tokens)} != grid {grid_h}x{grid_w}"
            )
        if any(not isinstance(t, list) or len(t) != dim for t in tokens):
            raise MalformedResponse("embed/image: token length != declared dim")
        self._check_dim(dim)
        try:
            vecs = tuple(EmbeddingVector(tuple(float(v) for v in t)) for t in tokens)
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"embed/image: bad token payload: {exc}") from exc
        return ImageTokenEmbeddings(grid_h=grid_h, grid_w=grid_w, tokens=vecs)

    def transcribe(self, media_bytes: bytes, media_type: str) -> TranscriptionResult:
        if media_type not in AUDIO_VIDEO_MEDIA_TYPES:
            raise UnsupportedMediaType(
                f"media type {media_type!r} not supported; expected one of "
                f"{sorted(AUDIO_VIDEO_MEDIA_TYPES)}"
            )
        body = self._post(
            "/v1/transcribe",
            {
                "model": self.config.model_name,
                "media_b64": base64.b64encode(media_bytes).decode("ascii"),
                "media_type": media_type,
            },
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise MalformedResponse("transcribe: missing or mistyped 'text'")
        return TranscriptionResult(
            text=text, media_id=hashlib.sha256(media_bytes).hexdigest()
        )

    def complete(
        self,
        messages: Sequence[ChatMessage],
        temperature: float = 0.0,
        max_tokens: int = 1024,
    ) -> str:
        if len(messages) == 0:
            raise EmptyInput("complete requires at least one message")
        for m in messages:
            if m.role not in VALID_ROLES:
                raise ValueError(
                    f"invalid message role {m.role!r}; expected one of {sorted(VALID_ROLES)}"
                )
        if max_tokens < 1:
            raise ValueError("max_tokens must be >= 1")
        body = self._post(
            "/v1/complete",
            {
                "model": self.config.model_name,
                "messages": [{"role": m.role, "content": m.content} for m in messages],
                "temperature": temperature,
                "max_tokens": max_tokens,
            },
        )
        text = body.get("text")
        if not isinstance(text, str):
            raise MalformedResponse("complete: missing or mistyped 'text'")
        return text
