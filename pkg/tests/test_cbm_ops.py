import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cbmrag.cbm import (
    ConceptEmbeddings,
    ConceptVector,
    LinearClassifier,
    SimilarityMatrix,
    classify,
    concept_vector,
    contribution_matrix,
    contributions,
    normalize_concepts,
    pool_concepts,
    saliency,
    similarity_matrix,
)
from cbmrag.errors import (
    ConceptSetMismatch,
    DimensionMismatch,
    IndexOutOfRange,
    OutOfRange,
    UnknownClassLabel,
)
from cbmrag.providers import EmbeddingVector, ImageTokenEmbeddings

from oracles import oracle_logits, oracle_similarity


def image_from_rows(rows, grid_h, grid_w):
    return ImageTokenEmbeddings(
        grid_h=grid_h,
        grid_w=grid_w,
        tokens=tuple(EmbeddingVector(tuple(float(v) for v in row)) for row in rows),
    )


def make_vector(normalized, concept_set_id="cs"):
    normalized = np.asarray(normalized, dtype=np.float64)
    return ConceptVector(
        concept_set_id=concept_set_id, raw=2.0 * normalized - 1.0, normalized=normalized
    )


class TestSimilarityMatrix:
    def test_orthogonal_vectors(self):
        image = image_from_rows([[1.0, 0.0]], 1, 1)
        concepts = ConceptEmbeddings("cs", np.array([[0.0, 1.0]]))
        S = similarity_matrix(image, concepts)
        assert S.values[0, 0] == 0.0

    def test_45_degrees(self):
        image = image_from_rows([[1.0, 0.0]], 1, 1)
        concepts = ConceptEmbeddings("cs", np.array([[1.0, 1.0]]))
        S = similarity_matrix(image, concepts)
        assert S.values[0, 0] == pytest.approx(np.sqrt(2.0) / 2.0, abs=1e-12)

    def test_zero_norm_gives_zero(self):
        image = image_from_rows([[0.0, 0.0]], 1, 1)
        concepts = ConceptEmbeddings("cs", np.array([[1.0, 1.0]]))
        S = similarity_matrix(image, concepts)
        assert S.values[0, 0] == 0.0

    def test_random_instance_matches_double_loop_oracle(self, rng):
        tokens = rng.normal(size=(6, 4))
        concepts = rng.normal(size=(3, 4))
        S = similarity_matrix(
            image_from_rows(tokens, 2, 3), ConceptEmbeddings("cs", concepts)
        )
        expected = oracle_similarity(tokens.tolist(), concepts.tolist())
        assert np.max(np.abs(S.values - np.array(expected))) < 1e-12

    def test_dimension_mismatch(self):
        image = image_from_rows([[1.0, 0.0]], 1, 1)
        concepts = ConceptEmbeddings("cs", np.array([[1.0, 0.0, 0.0]]))
        with pytest.raises(DimensionMismatch):
            similarity_matrix(image, concepts)


class TestPooling:
    def test_2x2_definition(self):
        S = SimilarityMatrix(np.array([[0.1, 0.9], [0.5, 0.2]]), 2, 1)
        assert pool_concepts(S).tolist() == [0.5, 0.9]

    def test_single_token_identity(self):
        S = SimilarityMatrix(np.array([[0.3, -0.2, 0.7]]), 1, 1)
        assert pool_concepts(S).tolist() == [0.3, -0.2, 0.7]

    def test_row_permutation_invariance(self, rng):
        values = rng.uniform(-1, 1, size=(6, 4))
        S = SimilarityMatrix(values, 2, 3)
        permuted = SimilarityMatrix(values[rng.permutation(6)], 2, 3)
        assert pool_concepts(S).tolist() == pool_concepts(permuted).tolist()

    @given(
        arrays(
            np.float64,
            st.tuples(st.integers(1, 8), st.integers(1, 5)),
            elements=st.floats(-1.0, 1.0),
        )
    )
    def test_pooling_dominance(self, values):
        S = SimilarityMatrix(values, values.shape[0], 1)
        raw = pool_concepts(S)
        assert np.all(raw[np.newaxis, :] >= values)
        assert np.all((values == raw[np.newaxis, :]).any(axis=0))


class TestNormalization:
    def test_endpoints_and_midpoint(self):
        out = normalize_concepts(np.array([-1.0, 0.0, 1.0]))
        assert out.tolist() == [0.0, 0.5, 1.0]

    def test_direct_affine(self):
        assert normalize_concepts(np.array([0.2])).tolist() == [0.6]

    def test_out_of_range_rejected(self):
        with pytest.raises(OutOfRange):
            normalize_concepts(np.array([1.1]))

    def test_tiny_slack_tolerated(self):
        out = normalize_concepts(np.array([1.0 + 5e-10]))
        assert out[0] == 1.0  # clipped back into range

    @given(
        # quantized to 6 dp: differences below float64 resolution of (x+1)/2
        # cannot survive the shift, so distinct inputs stay distinct
        arrays(
            np.float64,
            st.integers(2, 16),
            elements=st.floats(-1.0, 1.0).map(lambda x: round(x, 6)),
        ),
    )
    def test_monotone_and_rank_preserving(self, raw):
        normalized = normalize_concepts(raw)
        assert np.all(normalized >= 0.0) and np.all(normalized <= 1.0)
        assert np.array_equal(np.argsort(raw, kind="stable"), np.argsort(normalized, kind="stable"))
        order = np.argsort(raw)
        for a, b in zip(order[:-1], order[1:]):
            if raw[a] < raw[b]:
                assert normalized[a] < normalized[b]


class TestClassify:
    def test_zero_model_uniform_tie_breaks_to_first_label(self):
        model = LinearClassifier("cs", ("Pneumonia", "COVID-19", "Normal"), np.zeros((3, 2)), np.zeros(3))
        pred = classify(model, make_vector([0.7, 0.2]))
        assert np.allclose(pred.probabilities, [1 / 3] * 3, atol=1e-12)
        assert pred.predicted_label == "Pneumonia"

    def test_dominant_row(self):
        model = LinearClassifier("cs", ("a", "b"), np.array([[1.0, 0.0], [0.0, 1.0]]), np.zeros(2))
        pred = classify(model, make_vector([0.9, 0.1]))
        assert pred.predicted_label == "a"

    def test_random_matches_matrix_vector_oracle(self, rng):
        W = rng.normal(size=(3, 5))
        b = rng.normal(size=3)
        model = LinearClassifier("cs", ("a", "b", "c"), W, b)
        x = rng.uniform(0, 1, size=5)
        pred = classify(model, make_vector(x))
        expected = oracle_logits(W.tolist(), b.tolist(), x.tolist())
        assert np.max(np.abs(pred.logits - np.array(expected))) < 1e-12

    def test_concept_set_mismatch(self):
        model = LinearClassifier("cs", ("a", "b"), np.zeros((2, 2)), np.zeros(2))
        with pytest.raises(ConceptSetMismatch):
            classify(model, make_vector([0.5, 0.5], concept_set_id="other"))

    def test_probability_simplex_and_shift_invariance(self, rng):
        W = rng.normal(size=(4, 6))
        b = rng.normal(size=4)
        model = LinearClassifier("cs", ("a", "b", "c", "d"), W, b)
        x = rng.uniform(0, 1, size=6)
        pred = classify(model, make_vector(x))
        assert np.all(pred.probabilities >= 0)
        assert abs(pred.probabilities.sum() - 1.0) < 1e-6
        shifted = LinearClassifier("cs", model.class_labels, W, b + 7.5)
        shifted_pred = classify(shifted, make_vector(x))
        assert shifted_pred.predicted_label == pred.predicted_label


class TestContributions:
    def test_worked_example(self):
        model = LinearClassifier("cs", ("a", "b"), np.array([[0.5, -0.2], [0.0, 0.0]]), np.array([0.1, 0.0]))
        scores = contributions(model, make_vector([0.8, 0.4]), "a")
        assert scores.per_concept.tolist() == pytest.approx([0.4, -0.08], abs=1e-15)
        assert scores.bias == pytest.approx(0.1)
        assert scores.logit == pytest.approx(0.42, abs=1e-12)

    def test_zero_vector_leaves_bias(self):
        model = LinearClassifier("cs", ("a", "b"), np.ones((2, 3)), np.array([0.25, 0.0]))
        scores = contributions(model, make_vector([0.0, 0.0, 0.0]), "a")
        assert scores.per_concept.tolist() == [0.0, 0.0, 0.0]
        assert scores.logit == pytest.approx(0.25)

    def test_zero_weight_row(self):
        model = LinearClassifier("cs", ("a", "b"), np.array([[0.0, 0.0], [1.0, 1.0]]), np.zeros(2))
        scores = contributions(model, make_vector([0.9, 0.9]), "a")
        assert scores.per_concept.tolist() == [0.0, 0.0]

    def test_unknown_label(self):
        model = LinearClassifier("cs", ("a", "b"), np.zeros((2, 2)), np.zeros(2))
        with pytest.raises(UnknownClassLabel):
            contributions(model, make_vector([0.1, 0.2]), "zz")

    def test_decomposition_reconstructs_every_logit(self, rng):
        W = rng.normal(size=(3, 7))
        b = rng.normal(size=3)
        model = LinearClassifier("cs", ("a", "b", "c"), W, b)
        vec = make_vector(rng.uniform(0, 1, size=7))
        pred = classify(model, vec)
        for k, label in enumerate(model.class_labels):
            scores = contributions(model, vec, label)
            rel = abs(scores.logit - pred.logits[k]) / max(abs(pred.logits[k]), 1e-300)
            assert rel < 1e-5
        M = contribution_matrix(model, vec)
        assert np.allclose(M.sum(axis=1) + b, pred.logits, rtol=1e-12, atol=1e-12)


class TestSaliency:
    def test_minmax_endpoints(self):
        S = SimilarityMatrix(np.array([[0.2], [0.8], [0.5], [0.4]]), 2, 2)
        out = saliency(S, 0)
        assert out.grid.min() == 0.0 and out.grid.max() == 1.0
        assert out.grid[0, 1] == 1.0  # 0.8 was the max, row-major position 1
        assert out.grid[0, 0] == 0.0  # 0.2 was the min

    def test_constant_column_all_zero(self):
        S = SimilarityMatrix(np.full((4, 1), 0.3), 2, 2)
        assert saliency(S, 0).grid.tolist() == [[0.0, 0.0], [0.0, 0.0]]

    def test_worked_2x2_case(self):
        S = SimilarityMatrix(np.array([[0.0], [0.5], [1.0], [0.5]]), 2, 2)
        assert saliency(S, 0).grid.tolist() == [[0.0, 0.5], [1.0, 0.5]]

    def test_index_out_of_range(self):
        S = SimilarityMatrix(np.zeros((4, 2)), 2, 2)
        with pytest.raises(IndexOutOfRange):
            saliency(S, 2)

    def test_argmax_preserved(self, rng):
        for _ in range(50):
            column = rng.uniform(-1, 1, size=12)
            S = SimilarityMatrix(column.reshape(-1, 1), 3, 4)
            out = saliency(S, 0)
            assert int(np.argmax(out.grid.ravel())) == int(np.argmax(column))


def test_concept_vector_composition(rng):
    values = rng.uniform(-1, 1, size=(4, 3))
    S = SimilarityMatrix(values, 2, 2)
    vec = concept_vector("cs", S)
    assert vec.raw.tolist() == values.max(axis=0).tolist()
    assert np.allclose(vec.normalized, (vec.raw + 1) / 2)
