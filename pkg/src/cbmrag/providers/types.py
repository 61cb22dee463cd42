"""Data types shared by all neural-capability providers."""

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class EmbeddingVector:
    """A finite real vector of fixed dimension d >= 1."""

    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.values) < 1:
            raise ValueError("embedding vector must have dimension >= 1")
        if not all(math.isfinite(v) for v in self.values):
            raise ValueError("embedding vector contains non-finite values")

    @property
    def dim(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ImageTokenEmbeddings:
    """Token-level image embeddings on a spatial grid (row-major order)."""

    grid_h: int
    grid_w: int
    tokens: tuple[EmbeddingVector, ...]

    def __post_init__(self):
        if self.grid_h < 1 or self.grid_w < 1:
            raise ValueError("grid dimensions must be >= 1")
        if len(self.tokens) != self.grid_h * self.grid_w:
            raise ValueError(
                f"token count {len(self.tokens)} != grid {self.grid_h}x{self.grid_w}"
            )
        dims = {t.dim for t in self.tokens}
        if len(dims) > 1:
            raise ValueError(f"tokens have inconsistent dimensions: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.tokens[0].dim


@dataclass(frozen=True)
class TranscriptionResult:
    text: str
    media_id: str


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str


@dataclass
class ProviderConfig:
    """Connection settings for one remote provider endpoint."""

    endpoint: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 2
    auth_token_env: str = ""
    backoff_base: float = 0.5
    backoff_factor: float = 2.0

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


VALID_ROLES = frozenset({"system", "user", "assistant"})
IMAGE_MEDIA_TYPES = frozenset({"image/png", "image/jpeg"})
AUDIO_VIDEO_MEDIA_TYPES = frozenset({"audio/mpeg", "video/mp4"})
