import json

import pytest
from hypothesis import given, settings, strategies as st

from cbmrag.errors import CorruptStore, DuplicateDocument, UnknownStore, UnsupportedMediaType
from cbmrag.providers import FixtureTextEmbedder, FixtureTranscriber
from cbmrag.store import ChunkEmbeddingIndex, StoreCatalog

from oracles import oracle_seeded_vector, oracle_top_k


@pytest.fixture
def embedder():
    return FixtureTextEmbedder(dim=8)


class TestIngest:
    def test_2500_char_doc_adds_four_chunks(self, embedder):
        store = ChunkEmbeddingIndex("s")
        count = store.ingest_document("doc", "a" * 2500, embedder)
        assert count == 4
        assert len(store) == 4
        assert store.dim == 8

    def test_duplicate_doc_rejected_store_unchanged(self, embedder):
        store = ChunkEmbeddingIndex("s")
        store.ingest_document("doc", "hello world", embedder)
        size = len(store)
        with pytest.raises(DuplicateDocument):
            store.ingest_document("doc", "other text", embedder)
        assert len(store) == size

    def test_empty_text_adds_nothing(self, embedder):
        store = ChunkEmbeddingIndex("s")
        assert store.ingest_document("doc", "", embedder) == 0
        assert len(store) == 0

    def test_media_ingest_uses_transcript(self, embedder):
        transcriber = FixtureTranscriber()
        transcriber.register(b"clip", "patient reports dry cough")
        store = ChunkEmbeddingIndex("s")
        count = store.ingest_media("m1", b"clip", "audio/mpeg", transcriber, embedder)
        assert count == 1
        assert store.entries[0].chunk.text == "patient reports dry cough"

    def test_media_empty_transcript(self, embedder):
        store = ChunkEmbeddingIndex("s")
        count = store.ingest_media(
            "m1", b"silence", "video/mp4", FixtureTranscriber(), embedder
        )
        assert count == 0

    def test_media_unsupported_type(self, embedder):
        store = ChunkEmbeddingIndex("s")
        with pytest.raises(UnsupportedMediaType):
            store.ingest_media("m1", b"x", "text/plain", FixtureTranscriber(), embedder)


class TestQuery:
    def test_empty_store(self, embedder):
        assert ChunkEmbeddingIndex("s").query("anything", 5, embedder) == []

    def test_verbatim_chunk_scores_one(self, embedder):
        store = ChunkEmbeddingIndex("s")
        store.ingest_document("doc", "bilateral ground-glass opacity", embedder)
        store.ingest_document("other", "sharp costophrenic angles", embedder)
        hits = store.query("bilateral ground-glass opacity", 2, embedder)
        assert hits[0].chunk.doc_id == "doc"
        assert hits[0].score == pytest.approx(1.0, abs=1e-9)

    def test_k_larger_than_store(self, embedder):
        store = ChunkEmbeddingIndex("s")
        store.ingest_document("doc", "short text", embedder)
        assert len(store.query("short", 10, embedder)) == 1

    def test_sorted_non_increasing(self, embedder):
        store = ChunkEmbeddingIndex("s")
        for i in range(20):
            store.ingest_document(f"d{i:02d}", f"document number {i} about topic {i % 3}", embedder)
        hits = store.query("topic 1", 10, embedder)
        scores = [h.score for h in hits]
        assert scores == sorted(scores, reverse=True)

    def test_matches_exhaustive_oracle_1000_chunks(self, embedder):
        store = ChunkEmbeddingIndex("s")
        texts = [f"passage {i} term{i % 37} term{i % 11}" for i in range(1000)]
        for i, text in enumerate(texts):
            store.ingest_document(f"d{i:04d}", text, embedder)
        assert len(store) == 1000
        query = "term5 term3 passage"
        hits = store.query(query, 10, embedder)
        oracle_entries = [
            (f"d{i:04d}", 0, oracle_seeded_vector(b"text:" + t.encode(), 8))
            for i, t in enumerate(texts)
        ]
        expected = oracle_top_k(
            oracle_entries, oracle_seeded_vector(b"text:" + query.encode(), 8), 10
        )
        assert [(h.chunk.doc_id, h.chunk.chunk_index) for h in hits] == [
            (d, c) for d, c, _ in expected
        ]

    def test_k_must_be_positive(self, embedder):
        with pytest.raises(ValueError):
            ChunkEmbeddingIndex("s").query("x", 0, embedder)


class TestPersistence:
    def test_round_trip_bit_exact(self, tmp_path, embedder):
        store = ChunkEmbeddingIndex("s")
        store.ingest_document("d1", "first document about findings", embedder)
        store.ingest_document("d2", "second document " * 100, embedder)
        store.ingest_document("d3", "third", embedder)
        path = tmp_path / "s.json"
        store.persist(path)
        loaded = ChunkEmbeddingIndex.load(path)
        assert loaded.store_id == "s"
        assert loaded.dim == store.dim
        assert len(loaded) == len(store)
        for a, b in zip(store.entries, loaded.entries):
            assert a.chunk == b.chunk
            assert a.vector == b.vector  # bit-exact

    def test_vectors_serialized_as_17g_decimals(self, tmp_path, embedder):
        store = ChunkEmbeddingIndex("s")
        store.ingest_document("d1", "some text", embedder)
        path = tmp_path / "s.json"
        store.persist(path)
        payload = json.loads(path.read_text())
        assert payload["format_version"] == 1
        reparsed = [float(v) for v in payload["entries"][0]["vector"]]
        assert tuple(reparsed) == store.entries[0].vector

    def test_version_gate(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"format_version": 99, "store_id": "s", "dim": 0, "entries": []}))
        with pytest.raises(CorruptStore):
            ChunkEmbeddingIndex.load(path)

    def test_query_equivalence_after_reload(self, tmp_path, embedder):
        store = ChunkEmbeddingIndex("s")
        for i in range(50):
            store.ingest_document(f"d{i:02d}", f"text number {i} about finding {i % 7}", embedder)
        before = store.query("finding 3", 10, embedder)
        path = tmp_path / "s.json"
        store.persist(path)
        loaded = ChunkEmbeddingIndex.load(path)
        after = loaded.query("finding 3", 10, embedder)
        assert [(h.chunk.doc_id, h.chunk.chunk_index, h.score) for h in before] == [
            (h.chunk.doc_id, h.chunk.chunk_index, h.score) for h in after
        ]

    def test_duplicate_entries_rejected_on_load(self, tmp_path):
        entry = {
            "doc_id": "d",
            "chunk_index": 0,
            "start": 0,
            "end": 1,
            "text": "x",
            "vector": [1.0],
        }
        path = tmp_path / "dup.json"
        path.write_text(
            json.dumps(
                {"format_version": 1, "store_id": "s", "dim": 1, "entries": [entry, entry]}
            )
        )
        with pytest.raises(CorruptStore):
            ChunkEmbeddingIndex.load(path)

    @settings(max_examples=25)
    @given(st.lists(st.text(min_size=1, max_size=80).filter(lambda s: s.strip()), min_size=1, max_size=6, unique=True))
    def test_round_trip_property(self, texts):
        embedder = FixtureTextEmbedder(dim=4)
        store = ChunkEmbeddingIndex("p")
        for i, text in enumerate(texts):
            store.ingest_document(f"doc{i}", text, embedder)
        import tempfile, os

        fd, path = tempfile.mkstemp(suffix=".json")
        os.close(fd)
        try:
            store.persist(path)
            loaded = ChunkEmbeddingIndex.load(path)
            assert [e.vector for e in loaded.entries] == [e.vector for e in store.entries]
            assert [e.chunk for e in loaded.entries] == [e.chunk for e in store.entries]
        finally:
            os.unlink(path)


class TestCatalog:
    def test_disease_stores_exist_at_startup(self):
        catalog = StoreCatalog()
        for store_id in ("pneumonia", "covid19", "normal"):
            assert len(catalog.get(store_id)) == 0

    def test_unknown_store(self, embedder):
        catalog = StoreCatalog()
        with pytest.raises(UnknownStore):
            catalog.query("nonexistent", "q", 1, embedder)

    def test_ingest_persists_before_returning(self, tmp_path, embedder):
        catalog = StoreCatalog(persist_dir=tmp_path)
        catalog.ingest_document("pneumonia", "doc", "consolidation text", embedder)
        assert (tmp_path / "pneumonia.json").exists()
        reloaded = ChunkEmbeddingIndex.load(tmp_path / "pneumonia.json")
        assert len(reloaded) == 1

    def test_bootstrap_reloads_existing(self, tmp_path, embedder):
        catalog = StoreCatalog(persist_dir=tmp_path)
        catalog.ingest_document("covid19", "doc", "ground glass text", embedder)
        fresh = StoreCatalog.bootstrap(tmp_path)
        assert len(fresh.get("covid19")) == 1
        assert len(fresh.get("pneumonia")) == 0

    def test_session_uploads_view_shares_disease_stores(self, tmp_path, embedder):
        catalog = StoreCatalog(persist_dir=tmp_path)
        catalog.ingest_document("normal", "doc", "normal criteria", embedder)
        uploads = ChunkEmbeddingIndex("user_uploads")
        view = catalog.with_session_uploads(uploads, tmp_path / "uploads.json")
        assert len(view.get("normal")) == 1
        view.ingest_document("user_uploads", "u1", "patient history", embedder)
        assert len(uploads) == 1
        assert (tmp_path / "uploads.json").exists()
        # the base catalog has no user_uploads store
        with pytest.raises(UnknownStore):
            catalog.get("user_uploads")
