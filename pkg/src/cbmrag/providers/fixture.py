"""Deterministic offline providers.

Every vector is derived from a SHA-256 digest of a domain-tagged input: the
first 8 digest bytes (big-endian) seed a 64-bit xorshift generator whose draws
are mapped into [-1, 1); the resulting vector is L2-normalized. Identical
inputs therefore produce bit-identical outputs in any process, and unit norm
makes cosine similarity equal to the dot product.
"""

import hashlib
import math
from typing import Iterable, Sequence

from ..errors import EmptyInput, UnsupportedMediaType
from .types import (
    AUDIO_VIDEO_MEDIA_TYPES,
    EmbeddingVector,
    IMAGE_MEDIA_TYPES,
    ImageTokenEmbeddings,
    TranscriptionResult,
)

_MASK64 = (1 << 64) - 1
_ZERO_SEED_FALLBACK = 0x9E3779B97F4A7C15  # xorshift state must be nonzero


def seeded_unit_vector(tag: bytes, dim: int) -> tuple[float, ...]:
    """The shared fixture generator: tag -> unit vector of length dim."""
    digest = hashlib.sha256(tag).digest()
    state = int.from_bytes(digest[:8], "big") or _ZERO_SEED_FALLBACK
    values = []
    for _ in range(dim):
        state ^= (state << 13) & _MASK64
        state ^= state >> 7
        state ^= (state << 17) & _MASK64
        values.append(2.0 * (state / 2.0**64) - 1.0)
    norm = math.sqrt(sum(v * v for v in values))
    return tuple(v / norm for v in values)


class FixtureTextEmbedder:
    """Embeds text as seeded_unit_vector(b"text:" + utf8(text))."""

    def __init__(self, dim: int = 8):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim

    def embed_text(self, texts: Sequence[str]) -> list[EmbeddingVector]:
        if len(texts) == 0:
            raise EmptyInput("embed_text requires at least one input string")
        for i, text in enumerate(texts):
            if not text.strip():
                raise EmptyInput(f"input {i} is empty after trimming")
        return [
            EmbeddingVector(seeded_unit_vector(b"text:" + text.encode("utf-8"), self.dim))
            for text in texts
        ]


class FixtureImageEmbedder:
    """Embeds each grid token as seeded_unit_vector(b"image:" + bytes + b":" + index)."""

    def __init__(self, grid_h: int = 14, grid_w: int = 14, dim: int = 8):
        if grid_h < 1 or grid_w < 1:
            raise ValueError("grid dimensions must be >= 1")
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.grid_h = grid_h
        self.grid_w = grid_w
        self.dim = dim

    def embed_image(self, image_bytes: bytes, media_type: str) -> ImageTokenEmbeddings:
        if media_type not in IMAGE_MEDIA_TYPES:
            raise UnsupportedMediaType(
                f"media type {media_type!r} not supported; expected one of "
                f"{sorted(IMAGE_MEDIA_TYPES)}"
            )
        if not image_bytes:
            raise EmptyInput("image bytes must be non-empty")
        tokens = tuple(
            EmbeddingVector(
                seeded_unit_vector(b"image:" + image_bytes + b":%d" % i, self.dim)
            )
            for i in range(self.grid_h * self.grid_w)
        )
        return ImageTokenEmbeddings(grid_h=self.grid_h, grid_w=self.grid_w, tokens=tokens)


class FixtureTranscriber:
    """Returns canned transcripts keyed by SHA-256 of the media bytes.

    Unregistered media transcribes to the empty string (silent media), which
    is the defined default rather than an error.
    """

    def __init__(self, transcripts: dict[str, str] | None = None):
        self.transcripts = dict(transcripts or {})

    @staticmethod
    def media_key(media_bytes: bytes) -> str:
        return hashlib.sha256(media_bytes).hexdigest()

    def register(self, media_bytes: bytes, text: str) -> str:
        key = self.media_key(media_bytes)
        self.transcripts[key] = text
        return key

    def transcribe(self, media_bytes: bytes, media_type: str) -> TranscriptionResult:
        if media_type not in AUDIO_VIDEO_MEDIA_TYPES:
            raise UnsupportedMediaType(
                f"media type {media_type!r} not supported; expected one of "
                f"{sorted(AUDIO_VIDEO_MEDIA_TYPES)}"
            )
        key = self.media_key(media_bytes)
        return TranscriptionResult(text=self.transcripts.get(key, ""), media_id=key)


def fixture_vectors_for(texts: Iterable[str], dim: int) -> list[tuple[float, ...]]:
    """Convenience used by tests and asset scripts; mirrors FixtureTextEmbedder."""
    return [seeded_unit_vector(b"text:" + t.encode("utf-8"), dim) for t in texts]
