"""Capability protocols every provider backend implements.

Backends are stateless after construction and safe for concurrent calls
(the scripted completion oracle guards its cursor internally).
"""

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

from .types import ChatMessage, EmbeddingVector, ImageTokenEmbeddings, TranscriptionResult


@runtime_checkable
class TextEmbedder(Protocol):
    def embed_text(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        ...


@runtime_checkable
class ImageEmbedder(Protocol):
    def embed_image(self, image_bytes: bytes, media_type: str) -> ImageTokenEmbeddings:
        ...


@runtime_checkable
class Transcriber(Protocol):
    def transcribe(self, media_bytes: bytes, media_type: str) -> TranscriptionResult:
        ...


@runtime_checkable
class Completer(Protocol):
    def complete(
        self,
        messages: Sequence[ChatMessage],
        temperature: float = 0.0,
        max_tokens: int = 1024,
    ) -> str:
        ...


@dataclass
class ProviderBundle:
    """The four neural capabilities the rest of the system consumes."""

    text_embedder: TextEmbedder | None = None
    image_embedder: ImageEmbedder | None = None
    transcriber: Transcriber | None = None
    completer: Completer | None = None
