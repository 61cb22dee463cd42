from .catalog import DISEASE_STORE_IDS, StoreCatalog, USER_UPLOADS_STORE_ID
from .chunking import DEFAULT_MAX_CHARS, DEFAULT_OVERLAP, DocumentChunk, chunk_text
from .index import ChunkEmbeddingIndex, RetrievalHit, STORE_FORMAT_VERSION

__all__ = [
    "ChunkEmbeddingIndex",
    "DEFAULT_MAX_CHARS",
    "DEFAULT_OVERLAP",
    "DISEASE_STORE_IDS",
    "DocumentChunk",
    "RetrievalHit",
    "STORE_FORMAT_VERSION",
    "StoreCatalog",
    "USER_UPLOADS_STORE_ID",
    "chunk_text",
]
