"""Named collection of chunk stores: the three disease stores plus user uploads."""

from pathlib import Path

from ..errors import UnknownStore
from ..providers.base import TextEmbedder, Transcriber
from .chunking import DEFAULT_MAX_CHARS, DEFAULT_OVERLAP
from .index import ChunkEmbeddingIndex, RetrievalHit

DISEASE_STORE_IDS = ("pneumonia", "covid19", "normal")
USER_UPLOADS_STORE_ID = "user_uploads"


class StoreCatalog:
    """Maps store ids to indexes; ingestion persists before returning when a
    persistence directory is configured (in-memory catalogs skip that step)."""

    def __init__(
        self,
        stores: dict[str, ChunkEmbeddingIndex] | None = None,
        persist_dir: Path | str | None = None,
        max_chars: int = DEFAULT_MAX_CHARS,
        overlap: int = DEFAULT_OVERLAP,
    ):
        self.stores: dict[str, ChunkEmbeddingIndex] = dict(stores or {})
        self.persist_dir = Path(persist_dir) if persist_dir is not None else None
        self.max_chars = max_chars
        self.overlap = overlap
        for store_id in DISEASE_STORE_IDS:
            self.stores.setdefault(store_id, ChunkEmbeddingIndex(store_id))

    @classmethod
    def bootstrap(
        cls,
        stores_dir: Path | str | None,
        persist: bool = True,
        max_chars: int = DEFAULT_MAX_CHARS,
        overlap: int = DEFAULT_OVERLAP,
    ) -> "StoreCatalog":
        """Load the disease stores from stores_dir when present, else start empty."""
        stores: dict[str, ChunkEmbeddingIndex] = {}
        if stores_dir is not None:
            stores_dir = Path(stores_dir)
            for store_id in DISEASE_STORE_IDS:
                path = stores_dir / f"{store_id}.json"
                if path.exists():
                    stores[store_id] = ChunkEmbeddingIndex.load(path)
        return cls(
            stores=stores,
            persist_dir=stores_dir if persist else None,
            max_chars=max_chars,
            overlap=overlap,
        )

    def store_ids(self) -> list[str]:
        return list(self.stores)

    def get(self, store_id: str) -> ChunkEmbeddingIndex:
        try:
            return self.stores[store_id]
        except KeyError:
            raise UnknownStore(f"no store named {store_id!r}") from None

    def add_store(self, index: ChunkEmbeddingIndex, persist_path: Path | None = None) -> None:
        self.stores[index.store_id] = index
        if persist_path is not None:
            self._persist_paths = getattr(self, "_persist_paths", {})
            self._persist_paths[index.store_id] = persist_path

    def _path_for(self, store_id: str) -> Path | None:
        override = getattr(self, "_persist_paths", {}).get(store_id)
        if override is not None:
            return override
        if self.persist_dir is None:
            return None
        return self.persist_dir / f"{store_id}.json"

    def ingest_document(self, store_id: str, doc_id: str, text: str, embedder: TextEmbedder) -> int:
        store = self.get(store_id)
        count = store.ingest_document(
            doc_id, text, embedder, max_chars=self.max_chars, overlap=self.overlap
        )
        self._persist(store_id)
        return count

    def ingest_media(
        self,
        store_id: str,
        doc_id: str,
        media_bytes: bytes,
        media_type: str,
        transcriber: Transcriber,
        embedder: TextEmbedder,
    ) -> int:
        store = self.get(store_id)
        count = store.ingest_media(
            doc_id,
            media_bytes,
            media_type,
            transcriber,
            embedder,
            max_chars=self.max_chars,
            overlap=self.overlap,
        )
        self._persist(store_id)
        return count

    def query(self, store_id: str, query_text: str, k: int, embedder: TextEmbedder) -> list[RetrievalHit]:
        return self.get(store_id).query(query_text, k, embedder)

    def _persist(self, store_id: str) -> None:
        path = self._path_for(store_id)
        if path is not None:
            self.get(store_id).persist(path)

    def persist_store(self, store_id: str, path: Path | str | None = None) -> None:
        target = Path(path) if path is not None else self._path_for(store_id)
        if target is None:
            raise IOError(f"no persistence path configured for store {store_id!r}")
        self.get(store_id).persist(target)

    def with_session_uploads(self, uploads: ChunkEmbeddingIndex, persist_path: Path | None) -> "StoreCatalog":
        """A view sharing the disease stores but scoping user_uploads to one session."""
        view = StoreCatalog(
            stores=dict(self.stores),
            persist_dir=self.persist_dir,
            max_chars=self.max_chars,
            overlap=self.overlap,
        )
        view.add_store(uploads, persist_path)
        return view
