"""Embedded-chunk store: ingestion, exhaustive cosine retrieval, persistence.

Concurrency contract: many readers or one writer per store. Mutations swap an
immutable entries tuple under a lock; queries read whatever snapshot is
current without locking.
"""

import math
import threading
from dataclasses import dataclass
from pathlib import Path

from .. import jsonio
from ..errors import CorruptStore, DuplicateDocument, IoFailure
from ..providers.base import TextEmbedder, Transcriber
from .chunking import DEFAULT_MAX_CHARS, DEFAULT_OVERLAP, DocumentChunk, chunk_text

STORE_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RetrievalHit:
    chunk: DocumentChunk
    score: float


@dataclass(frozen=True)
class _Entry:
    chunk: DocumentChunk
    vector: tuple[float, ...]


class ChunkEmbeddingIndex:
    """One named store of (chunk, embedding) entries.

    dim is 0 while the store is empty and is fixed by the first ingested
    vector; every later vector must match it.
    """

    def __init__(self, store_id: str, dim: int = 0, entries: list[_Entry] | None = None):
        self.store_id = store_id
        self.dim = dim
        self._entries: tuple[_Entry, ...] = tuple(entries or ())
        self._lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    @property
    def entries(self) -> tuple[_Entry, ...]:
        return self._entries

    def doc_ids(self) -> set[str]:
        return {e.chunk.doc_id for e in self._entries}

    # -- ingestion -------------------------------------------------------------

    def ingest_document(
        self,
        doc_id: str,
        text: str,
        embedder: TextEmbedder,
        max_chars: int = DEFAULT_MAX_CHARS,
        overlap: int = DEFAULT_OVERLAP,
    ) -> int:
        """Chunk, embed, and append a document. Returns the number of chunks added."""
        with self._lock:
            if any(e.chunk.doc_id == doc_id for e in self._entries):
                raise DuplicateDocument(f"document {doc_id!r} already in store {self.store_id!r}")
            chunks = chunk_text(text, doc_id=doc_id, max_chars=max_chars, overlap=overlap)
            if not chunks:
                return 0
            vectors = embedder.embed_text([c.text for c in chunks])
            new_entries = []
            for chunk, vec in zip(chunks, vectors):
                if self.dim == 0:
                    self.dim = vec.dim
                elif vec.dim != self.dim:
                    raise CorruptStore(
                        f"store {self.store_id!r} has dim {self.dim}, got vector of dim {vec.dim}"
                    )
                new_entries.append(_Entry(chunk=chunk, vector=vec.values))
            self._entries = self._entries + tuple(new_entries)
            return len(new_entries)

    def ingest_media(
        self,
        doc_id: str,
        media_bytes: bytes,
        media_type: str,
        transcriber: Transcriber,
        embedder: TextEmbedder,
        max_chars: int = DEFAULT_MAX_CHARS,
        overlap: int = DEFAULT_OVERLAP,
    ) -> int:
        """Transcribe media, then ingest the transcript as a document."""
        result = transcriber.transcribe(media_bytes, media_type)
        return self.ingest_document(
            doc_id, result.text, embedder, max_chars=max_chars, overlap=overlap
        )

    # -- retrieval ---------------------------------------------------------------

    def query(self, query_text: str, k: int, embedder: TextEmbedder) -> list[RetrievalHit]:
        """Exhaustive cosine scan; top-k by descending score, ties by
        (doc_id, chunk_index) ascending. Returns fewer than k only when the
        store is smaller."""
        if k < 1:
            raise ValueError("k must be >= 1")
        entries = self._entries
        if not entries:
            return []
        q = embedder.embed_text([query_text])[0].values
        q_norm = math.sqrt(sum(v * v for v in q))
        scored = []
        for e in entries:
            scored.append((_cosine(q, q_norm, e.vector), e))
        scored.sort(key=lambda pair: (-pair[0], pair[1].chunk.doc_id, pair[1].chunk.chunk_index))
        return [RetrievalHit(chunk=e.chunk, score=s) for s, e in scored[:k]]

    # -- persistence ---------------------------------------------------------------

    def persist(self, path: Path | str) -> None:
        payload = {
            "format_version": STORE_FORMAT_VERSION,
            "store_id": self.store_id,
            "dim": self.dim,
            "entries": [
                {
                    "doc_id": e.chunk.doc_id,
                    "chunk_index": e.chunk.chunk_index,
                    "start": e.chunk.start,
                    "end": e.chunk.end,
                    "text": e.chunk.text,
                    "vector": list(e.vector),
                }
                for e in self._entries
            ],
        }
        try:
            jsonio.dump_file(payload, path)
        except OSError as exc:
            raise IoFailure(f"cannot write store file {path}: {exc}") from exc

    @classmethod
    def load(cls, path: Path | str) -> "ChunkEmbeddingIndex":
        try:
            payload = jsonio.load_file(path)
        except OSError as exc:
            raise IoFailure(f"cannot read store file {path}: {exc}") from exc
        except ValueError as exc:
            raise CorruptStore(f"store file {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict) or payload.get("format_version") != STORE_FORMAT_VERSION:
            raise CorruptStore(
                f"store file {path}: unsupported format_version "
                f"{payload.get('format_version') if isinstance(payload, dict) else '?'}"
            )
        try:
            entries = []
            seen: set[tuple[str, int]] = set()
            for raw in payload["entries"]:
                chunk = DocumentChunk(
                    doc_id=raw["doc_id"],
                    chunk_index=raw["chunk_index"],
                    text=raw["text"],
                    start=raw["start"],
                    end=raw["end"],
                )
                key = (chunk.doc_id, chunk.chunk_index)
                if key in seen:
                    raise CorruptStore(f"store file {path}: duplicate entry {key}")
                seen.add(key)
                vector = tuple(float(v) for v in raw["vector"])
                if payload["dim"] and len(vector) != payload["dim"]:
                    raise CorruptStore(
                        f"store file {path}: vector length {len(vector)} != dim {payload['dim']}"
                    )
                entries.append(_Entry(chunk=chunk, vector=vector))
            return cls(store_id=payload["store_id"], dim=payload["dim"], entries=entries)
        except CorruptStore:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptStore(f"store file {path} has a bad schema: {exc}") from exc


def _cosine(q: tuple[float, ...], q_norm: float, v: tuple[float, ...]) -> float:
    v_norm = math.sqrt(sum(x * x for x in v))
    if q_norm == 0.0 or v_norm == 0.0:
        return 0.0
    dot = sum(a * b for a, b in zip(q, v))
    return max(-1.0, min(1.0, dot / (q_norm * v_norm)))
