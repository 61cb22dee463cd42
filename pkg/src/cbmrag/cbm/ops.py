"""Concept-bottleneck operations: similarity, pooling, classification, saliency.

All functions are pure over immutable inputs and safe for concurrent use.
"""

import numpy as np

from ..errors import (
    ConceptSetMismatch,
    DimensionMismatch,
    IndexOutOfRange,
    OutOfRange,
    UnknownClassLabel,
)
from ..providers.types import ImageTokenEmbeddings
from .types import (
    ConceptEmbeddings,
    ConceptVector,
    ContributionScores,
    LinearClassifier,
    Prediction,
    SaliencyMap,
    SimilarityMatrix,
)


def image_token_matrix(image: ImageTokenEmbeddings) -> np.ndarray:
    return np.asarray([t.values for t in image.tokens], dtype=np.float64)


def similarity_matrix(image: ImageTokenEmbeddings, concepts: ConceptEmbeddings) -> SimilarityMatrix:
    """Cosine similarity of every image token against every concept embedding.

    Zero-norm vectors on either side yield similarity 0 for the affected
    entries. Results are clipped to [-1, 1] to absorb float round-off.
    """
    U = image_token_matrix(image)  # (T, d)
    V = concepts.matrix  # (K, d)
    if U.shape[1] != V.shape[1]:
        raise DimensionMismatch(
            f"image tokens have dimension {U.shape[1]} but concepts have {V.shape[1]}"
        )
    u_norm = np.linalg.norm(U, axis=1)  # (T,)
    v_norm = np.linalg.norm(V, axis=1)  # (K,)
    denom = np.outer(u_norm, v_norm)  # (T, K)
    with np.errstate(divide="ignore", invalid="ignore"):
        S = np.where(denom > 0.0, (U @ V.T) / np.where(denom > 0.0, denom, 1.0), 0.0)
    S = np.clip(S, -1.0, 1.0)
    return SimilarityMatrix(values=S, grid_h=image.grid_h, grid_w=image.grid_w)


def pool_concepts(S: SimilarityMatrix) -> np.ndarray:
    """Max over image tokens, per concept: raw[j] = max_i S[i][j]."""
    return S.values.max(axis=0)


def normalize_concepts(raw: np.ndarray) -> np.ndarray:
    """Affine map [-1, 1] -> [0, 1]: (raw + 1) / 2. Strictly increasing, so
    the concept ranking is unchanged by normalization."""
    raw = np.asarray(raw, dtype=np.float64)
    if raw.size and (raw.min() < -1.0 - 1e-9 or raw.max() > 1.0 + 1e-9):
        raise OutOfRange(
            f"raw activations outside [-1, 1]: min={raw.min()}, max={raw.max()}"
        )
    return np.clip((raw + 1.0) / 2.0, 0.0, 1.0)


def concept_vector(concept_set_id: str, S: SimilarityMatrix) -> ConceptVector:
    raw = pool_concepts(S)
    return ConceptVector(concept_set_id=concept_set_id, raw=raw, normalized=normalize_concepts(raw))


def softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max()
    e = np.exp(shifted)
    return e / e.sum()


def classify(model: LinearClassifier, c: ConceptVector) -> Prediction:
    """Logits = W @ normalized + b; argmax ties break toward the lowest index."""
    if model.concept_set_id != c.concept_set_id:
        raise ConceptSetMismatch(
            f"classifier is for concept set {model.concept_set_id!r}, "
            f"vector is for {c.concept_set_id!r}"
        )
    if c.normalized.shape[0] != model.num_concepts:
        raise ConceptSetMismatch(
            f"classifier expects {model.num_concepts} concepts, vector has {c.normalized.shape[0]}"
        )
    logits = model.W @ c.normalized + model.b
    probabilities = softmax(logits)
    predicted = model.class_labels[int(np.argmax(probabilities))]
    return Prediction(logits=logits, probabilities=probabilities, predicted_label=predicted)


def contributions(model: LinearClassifier, c: ConceptVector, class_label: str) -> ContributionScores:
    """Elementwise product of the class's weight row with the normalized vector."""
    try:
        k = model.label_index(class_label)
    except KeyError:
        raise UnknownClassLabel(
            f"label {class_label!r} not in {list(model.class_labels)}"
        ) from None
    per_concept = model.W[k] * c.normalized
    return ContributionScores(class_label=class_label, per_concept=per_concept, bias=float(model.b[k]))


def contribution_matrix(model: LinearClassifier, c: ConceptVector) -> np.ndarray:
    """Full C x K contribution decomposition (row k explains class k's logit)."""
    return model.W * c.normalized[np.newaxis, :]


def saliency(S: SimilarityMatrix, j: int, concept_id: str | None = None) -> SaliencyMap:
    """Column j reshaped row-major onto the token grid, min-max scaled to [0, 1].

    A constant column has no contrast and maps to the all-zero grid.
    """
    if j < 0 or j >= S.values.shape[1]:
        raise IndexOutOfRange(f"concept index {j} out of range [0, {S.values.shape[1]})")
    column = S.values[:, j]
    grid = column.reshape(S.grid_h, S.grid_w)
    lo, hi = float(grid.min()), float(grid.max())
    if hi == lo:
        scaled = np.zeros_like(grid)
    else:
        scaled = (grid - lo) / (hi - lo)
    return SaliencyMap(concept_id=concept_id if concept_id is not None else str(j), grid=scaled)
