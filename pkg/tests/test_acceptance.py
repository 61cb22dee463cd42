"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Everything here runs offline on the deterministic fixture providers and the
scripted completion oracle; no secondary component is required.
"""

import json
import socket
import threading
import time
from contextlib import contextmanager

import httpx
import numpy as np
import pytest

from cbmrag import assets
from cbmrag.agents import radiologist_consult, run_report_pipeline
from cbmrag.cbm import (
    ConceptEmbeddings,
    ConceptVector,
    ContributionScores,
    LinearClassifier,
    Prediction,
    SimilarityMatrix,
    TrainConfig,
    classify,
    concept_vector,
    contributions,
    evaluate,
    load_classifier,
    load_concept_set,
    loss_and_gradients,
    loss_only,
    normalize_concepts,
    pool_concepts,
    saliency,
    similarity_matrix,
    train,
)
from cbmrag.providers import (
    EmbeddingVector,
    FixtureImageEmbedder,
    FixtureTextEmbedder,
    FixtureTranscriber,
    ImageTokenEmbeddings,
    ProviderBundle,
    ScriptedCompleter,
)
from cbmrag.service import AppState, create_app, load_config, upsample_bilinear
from cbmrag.store import ChunkEmbeddingIndex, StoreCatalog

from oracles import (
    oracle_bilinear_upsample,
    oracle_logits,
    oracle_seeded_vector,
    oracle_similarity,
    oracle_top_k,
)


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL", flush=True)
        raise
    print(f"[ACCEPTANCE] {name}: PASS", flush=True)


PIPELINE_SCRIPT = [
    "Thought: consult the knowledge store about the leading concepts.\n"
    "Action: retrieve\nAction Input: leading imaging concepts",
    "Final Answer: concept evidence is consistent with the predicted class.",
    "Consolidated: the imaging pattern and retrieved references agree with the prediction.",
    "FINDINGS: demo findings body\nDIAGNOSIS: demo diagnosis body\nGUIDELINES: demo guidelines body",
]


def test_logit_decomposition_1000_randomized_instances():
    with criterion("logit decomposition (1000 instances, 1e-5 relative)"):
        rng = np.random.default_rng(42)
        started = time.perf_counter()
        for _ in range(1000):
            C = int(rng.integers(2, 5))
            K = int(rng.integers(1, 33))
            model = LinearClassifier(
                "cs",
                tuple(f"class{i}" for i in range(C)),
                rng.normal(scale=2.0, size=(C, K)),
                rng.normal(scale=2.0, size=C),
            )
            normalized = rng.uniform(0, 1, size=K)
            vec = ConceptVector("cs", 2.0 * normalized - 1.0, normalized)
            prediction = classify(model, vec)
            for k, label in enumerate(model.class_labels):
                scores = contributions(model, vec, label)
                total = float(scores.per_concept.sum() + scores.bias)
                rel = abs(total - prediction.logits[k]) / max(abs(prediction.logits[k]), 1e-300)
                assert rel < 1e-5
        elapsed = time.perf_counter() - started
        assert elapsed < 5.0, f"took {elapsed:.2f}s, budget 5s"


def test_oracle_equivalence_similarity_classify_retrieval_upsampling():
    with criterion("oracle equivalence (similarity/classify/retrieval/upsampling)"):
        rng = np.random.default_rng(43)
        started = time.perf_counter()

        # similarity vs double-loop cosine, <= 1e-12
        for _ in range(200):
            T = int(rng.integers(1, 9))
            K = int(rng.integers(1, 6))
            d = int(rng.integers(1, 7))
            tokens = rng.normal(size=(T, d))
            concepts = rng.normal(size=(K, d))
            image = ImageTokenEmbeddings(
                grid_h=T,
                grid_w=1,
                tokens=tuple(EmbeddingVector(tuple(map(float, row))) for row in tokens),
            )
            S = similarity_matrix(image, ConceptEmbeddings("cs", concepts))
            expected = np.array(oracle_similarity(tokens.tolist(), concepts.tolist()))
            assert np.max(np.abs(S.values - np.clip(expected, -1, 1))) <= 1e-12

        # classify vs loop matrix-vector oracle, <= 1e-12
        for _ in range(200):
            C = int(rng.integers(2, 5))
            K = int(rng.integers(1, 6))
            model = LinearClassifier(
                "cs",
                tuple(f"c{i}" for i in range(C)),
                rng.normal(size=(C, K)),
                rng.normal(size=C),
            )
            normalized = rng.uniform(0, 1, size=K)
            vec = ConceptVector("cs", 2.0 * normalized - 1.0, normalized)
            logits = classify(model, vec).logits
            expected = oracle_logits(model.W.tolist(), model.b.tolist(), normalized.tolist())
            assert np.max(np.abs(logits - np.array(expected))) <= 1e-12

        # retrieval: store of 1000 chunks, k=10, exact ordering vs exhaustive scan
        embedder = FixtureTextEmbedder(dim=8)
        store = ChunkEmbeddingIndex("acceptance")
        texts = [f"passage {i} topic{i % 23} marker{i % 7}" for i in range(1000)]
        for i, text in enumerate(texts):
            store.ingest_document(f"d{i:04d}", text, embedder)
        query = "topic7 marker3 passage"
        hits = store.query(query, 10, embedder)
        oracle_entries = [
            (f"d{i:04d}", 0, oracle_seeded_vector(b"text:" + t.encode(), 8))
            for i, t in enumerate(texts)
        ]
        expected_hits = oracle_top_k(
            oracle_entries, oracle_seeded_vector(b"text:" + query.encode(), 8), 10
        )
        assert [(h.chunk.doc_id, h.chunk.chunk_index) for h in hits] == [
            (doc, idx) for doc, idx, _ in expected_hits
        ]

        # bilinear upsampling: exact pixels vs per-pixel oracle
        for _ in range(50):
            gh, gw = int(rng.integers(1, 8)), int(rng.integers(1, 8))
            width, height = int(rng.integers(1, 33)), int(rng.integers(1, 33))
            grid = rng.uniform(0, 1, size=(gh, gw))
            assert upsample_bilinear(grid, width, height).tolist() == oracle_bilinear_upsample(
                grid.tolist(), width, height
            )

        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"took {elapsed:.2f}s, budget 30s"


def test_gradient_check_100_trials():
    with criterion("gradient check (100 trials, max rel err < 1e-4)"):
        rng = np.random.default_rng(44)
        h = 1e-5
        worst = 0.0
        for _ in range(100):
            C = int(rng.integers(2, 5))
            K = int(rng.integers(1, 7))
            N = int(rng.integers(2, 9))
            W = rng.normal(size=(C, K))
            b = rng.normal(size=C)
            X = rng.uniform(0, 1, size=(N, K))
            y = rng.integers(0, C, size=N)
            l2 = 1e-4
            _, dW, db = loss_and_gradients(W, b, X, y, l2)
            for analytic, param, is_W in ((dW, W, True), (db, b, False)):
                flat = analytic.ravel()
                for idx in range(flat.size):
                    plus, minus = param.copy(), param.copy()
                    plus.ravel()[idx] += h
                    minus.ravel()[idx] -= h
                    if is_W:
                        fplus = loss_only(plus, b, X, y, l2)
                        fminus = loss_only(minus, b, X, y, l2)
                    else:
                        fplus = loss_only(W, plus, X, y, l2)
                        fminus = loss_only(W, minus, X, y, l2)
                    numeric = (fplus - fminus) / (2 * h)
                    denom = max(abs(flat[idx]), abs(numeric), 1e-8)
                    worst = max(worst, abs(flat[idx] - numeric) / denom)
        assert worst < 1e-4, f"max relative error {worst:.2e}"


def make_separable_dataset(rng, n_samples=300, n_concepts=10, noise=0.05):
    """Three orthogonal prototypes in concept space plus Gaussian noise."""
    prototypes = np.full((3, n_concepts), 0.1)
    for k in range(3):
        prototypes[k, k] = 0.9
    samples = []
    labels = ("Pneumonia", "COVID-19", "Normal")
    for i in range(n_samples):
        k = i % 3
        normalized = np.clip(prototypes[k] + rng.normal(0, noise, size=n_concepts), 0.0, 1.0)
        samples.append(
            (ConceptVector("cs", 2.0 * normalized - 1.0, normalized), labels[k])
        )
    return samples, labels


def test_synthetic_training_99_percent():
    with criterion("synthetic training (>= 99% accuracy in < 5 s, deterministic)"):
        started = time.perf_counter()
        samples, labels = make_separable_dataset(np.random.default_rng(45))
        model = train(samples, TrainConfig(), class_labels=labels)
        metrics = evaluate(model, samples)
        elapsed = time.perf_counter() - started
        assert metrics.accuracy >= 0.99, f"accuracy {metrics.accuracy:.4f}"
        assert elapsed < 5.0, f"took {elapsed:.2f}s, budget 5s"
        # deterministic: retrain from identically generated data
        samples2, _ = make_separable_dataset(np.random.default_rng(45))
        model2 = train(samples2, TrainConfig(), class_labels=labels)
        assert np.array_equal(model.W, model2.W)
        assert np.array_equal(model.b, model2.b)


def test_pooling_normalization_invariants_10000_matrices():
    with criterion("pooling/normalization invariants (10,000 random matrices)"):
        rng = np.random.default_rng(46)
        batches = 10
        per_batch = 1000  # 10 x 1000 = 10,000 matrices
        for _ in range(batches):
            T = int(rng.integers(1, 9))
            K = int(rng.integers(1, 6))
            stack = rng.uniform(-1, 1, size=(per_batch, T, K))
            raw = stack.max(axis=1)  # pooling over tokens
            # dominance: raw >= every entry, with equality attained
            assert np.all(raw[:, np.newaxis, :] >= stack)
            assert np.all((stack == raw[:, np.newaxis, :]).any(axis=1))
            # permutation invariance over token rows
            perm = rng.permutation(T)
            assert np.array_equal(stack[:, perm, :].max(axis=1), raw)
            # affine endpoints and monotone rank preservation
            normalized = (raw + 1.0) / 2.0
            assert np.all(normalized >= 0.0) and np.all(normalized <= 1.0)
            assert np.array_equal(
                np.argsort(raw, axis=1, kind="stable"),
                np.argsort(normalized, axis=1, kind="stable"),
            )
        # exact affine endpoints via the public operation
        assert normalize_concepts(np.array([-1.0, 0.0, 1.0])).tolist() == [0.0, 0.5, 1.0]


def test_saliency_1000_columns_and_golden_bilinear():
    with criterion("saliency argmax/constant rules (1000 columns) + golden bilinear"):
        rng = np.random.default_rng(47)
        for _ in range(1000):
            gh, gw = int(rng.integers(1, 7)), int(rng.integers(1, 7))
            column = rng.uniform(-1, 1, size=gh * gw)
            S = SimilarityMatrix(column.reshape(-1, 1), gh, gw)
            grid = saliency(S, 0).grid
            assert int(np.argmax(grid.ravel())) == int(np.argmax(column))
            assert grid.min() >= 0.0 and grid.max() <= 1.0
        # degenerate constant columns collapse to zero
        for value in (-1.0, 0.0, 0.25, 1.0):
            S = SimilarityMatrix(np.full((6, 1), value), 2, 3)
            assert np.all(saliency(S, 0).grid == 0.0)
        # golden 2x2 -> 4x4 case, exact pixels
        grid = np.array([[0.0, 0.5], [1.0, 0.5]])
        golden = [
            [0, 32, 96, 128],
            [64, 80, 112, 128],
            [191, 175, 143, 128],
            [255, 223, 159, 128],
        ]
        assert upsample_bilinear(grid, 4, 4).tolist() == golden
        assert oracle_bilinear_upsample(grid.tolist(), 4, 4) == golden


class RoutingCatalog(StoreCatalog):
    def __init__(self):
        super().__init__()
        self.queried = []

    def query(self, store_id, query_text, k, embedder):
        self.queried.append(store_id)
        return super().query(store_id, query_text, k, embedder)


def run_scripted_pipeline(clock_value="1970-01-01T00:00:00+00:00"):
    """analyze -> consult -> report, fully deterministic, returns the serialized bundle."""
    embedder = FixtureTextEmbedder(dim=8)
    image_embedder = FixtureImageEmbedder(grid_h=4, grid_w=4, dim=8)
    concept_set = load_concept_set(assets.default_concepts_path())
    model = load_classifier(assets.demo_classifier_path())
    concept_vectors = embedder.embed_text([c.prompt_text for c in concept_set.concepts])
    concept_embeddings = ConceptEmbeddings(
        concept_set.id, np.asarray([v.values for v in concept_vectors])
    )
    tokens = image_embedder.embed_image(assets.demo_image_path().read_bytes(), "image/png")
    S = similarity_matrix(tokens, concept_embeddings)
    vec = concept_vector(concept_set.id, S)
    prediction = classify(model, vec)
    contribs = contributions(model, vec, prediction.predicted_label)
    catalog = StoreCatalog()
    catalog.get("pneumonia").ingest_document("ref", "pneumonia reference text", embedder)
    catalog.get("covid19").ingest_document("ref", "covid reference text", embedder)
    catalog.get("normal").ingest_document("ref", "normal reference text", embedder)
    bundle = run_report_pipeline(
        prediction,
        contribs,
        concept_set,
        catalog,
        ScriptedCompleter(PIPELINE_SCRIPT),
        embedder,
        clock=lambda: clock_value,
    )
    return json.dumps(bundle.to_dict(), sort_keys=True).encode("utf-8")


def test_agent_determinism_and_routing():
    with criterion("agent determinism (5 runs byte-identical) + store routing"):
        outputs = {run_scripted_pipeline() for _ in range(5)}
        assert len(outputs) == 1, "pipeline output varied across runs"

        concept_set = load_concept_set(assets.default_concepts_path())
        embedder = FixtureTextEmbedder(dim=8)
        for label, store_id in (
            ("Pneumonia", "pneumonia"),
            ("COVID-19", "covid19"),
            ("Normal", "normal"),
        ):
            catalog = RoutingCatalog()
            logits = np.zeros(3)
            probabilities = np.full(3, 1.0 / 3.0)
            prediction = Prediction(logits, probabilities, label)
            contribs = ContributionScores(label, np.linspace(0.9, -0.9, 20), 0.0)
            radiologist_consult(
                prediction,
                contribs,
                concept_set,
                catalog,
                ScriptedCompleter(PIPELINE_SCRIPT[:3]),
                embedder,
            )
            assert catalog.queried == [store_id], f"{label} routed to {catalog.queried}"


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_end_to_end_fixture_flow_over_http(tmp_path):
    with criterion("end-to-end HTTP flow (analyze, flip, report) < 10 s"):
        import uvicorn

        started = time.perf_counter()
        config = load_config(env={})
        config.paths.stores_dir = str(tmp_path / "stores")
        config.paths.sessions_dir = str(tmp_path / "sessions")
        bundle = ProviderBundle(
            text_embedder=FixtureTextEmbedder(dim=8),
            image_embedder=FixtureImageEmbedder(grid_h=4, grid_w=4, dim=8),
            transcriber=FixtureTranscriber(),
            completer=ScriptedCompleter(PIPELINE_SCRIPT),
        )
        app = create_app(AppState(config, bundle=bundle))
        port = free_port()
        server = uvicorn.Server(
            uvicorn.Config(app, host="127.0.0.1", port=port, log_level="error")
        )
        thread = threading.Thread(target=server.run, daemon=True)
        thread.start()
        try:
            deadline = time.time() + 5
            while not server.started and time.time() < deadline:
                time.sleep(0.02)
            assert server.started, "server failed to start"
            base = f"http://127.0.0.1:{port}"
            with httpx.Client(base_url=base, timeout=10.0) as client:
                session_id = client.post("/v1/sessions").json()["id"]
                response = client.post(
                    f"/v1/sessions/{session_id}/image",
                    files={"file": ("demo.png", assets.demo_image_bytes(), "image/png")},
                )
                assert response.status_code == 200, response.text
                analysis = response.json()
                ranked = [abs(c["contribution"]) for c in analysis["concepts"]]
                assert ranked == sorted(ranked, reverse=True)

                first_label = analysis["prediction"]["predicted_label"]
                signature = {
                    "Pneumonia": "consolidation",
                    "COVID-19": "ground_glass",
                    "Normal": "clear_lungs",
                }
                target = next(l for l in signature if l != first_label)
                overrides = {cid: 0.0 for cid in signature.values()}
                overrides[signature[target]] = 1.0
                flipped = client.patch(
                    f"/v1/sessions/{session_id}/concepts", json={"overrides": overrides}
                ).json()
                assert flipped["prediction"]["predicted_label"] == target

                report = client.post(f"/v1/sessions/{session_id}/report")
                assert report.status_code == 200, report.text
                body = report.json()
                assert body["findings"] and body["diagnosis"] and body["guidelines"]
                assert len(body["traces"]) >= 2
        finally:
            server.should_exit = True
            thread.join(timeout=5)
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"took {elapsed:.2f}s, budget 10s"


def test_store_round_trip_bit_exact(tmp_path):
    with criterion("store round-trip (persist/load/query bit-exact)"):
        embedder = FixtureTextEmbedder(dim=8)
        store = ChunkEmbeddingIndex("roundtrip")
        for i in range(200):
            store.ingest_document(f"doc{i:03d}", f"passage {i} about marker{i % 13}", embedder)
        path = tmp_path / "store.json"
        store.persist(path)
        loaded = ChunkEmbeddingIndex.load(path)
        assert loaded.dim == store.dim
        assert len(loaded) == len(store)
        for original, reloaded in zip(store.entries, loaded.entries):
            assert original.chunk == reloaded.chunk
            assert original.vector == reloaded.vector  # bit-exact
        query = "marker7 passage"
        before = [(h.chunk.doc_id, h.chunk.chunk_index, h.score) for h in store.query(query, 10, embedder)]
        after = [(h.chunk.doc_id, h.chunk.chunk_index, h.score) for h in loaded.query(query, 10, embedder)]
        assert before == after  # ordering and scores identical
