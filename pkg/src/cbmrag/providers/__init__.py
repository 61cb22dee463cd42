from .base import Completer, ImageEmbedder, ProviderBundle, TextEmbedder, Transcriber
from .fixture import (
    FixtureImageEmbedder,
    FixtureTextEmbedder,
    FixtureTranscriber,
    seeded_unit_vector,
)
from .http import HttpProvider
from .scripted import ScriptedCompleter
from .types import (
    ChatMessage,
    EmbeddingVector,
    ImageTokenEmbeddings,
    ProviderConfig,
    TranscriptionResult,
)

__all__ = [
    "ChatMessage",
    "Completer",
    "EmbeddingVector",
    "FixtureImageEmbedder",
    "FixtureTextEmbedder",
    "FixtureTranscriber",
    "HttpProvider",
    "ImageEmbedder",
    "ImageTokenEmbeddings",
    "ProviderBundle",
    "ProviderConfig",
    "ScriptedCompleter",
    "TextEmbedder",
    "Transcriber",
    "TranscriptionResult",
    "seeded_unit_vector",
]
