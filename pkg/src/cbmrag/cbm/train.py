"""Classifier training (full-batch gradient descent) and evaluation.

The objective is mean softmax cross-entropy plus an L2 penalty on the weights
(bias unpenalized):

    L(W, b) = -(1/N) sum_i log p_i[y_i] + 0.5 * l2 * ||W||^2

Weights start at zero and updates are deterministic for a fixed sample order;
the seed is reserved for optional shuffling and unused by the default recipe.
"""

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptyClass, EmptyDataset, InconsistentConceptSet
from .ops import classify
from .types import ConceptVector, EvalMetrics, LinearClassifier


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 500
    seed: int = 0
    l2_weight: float = 1e-4


def _design_matrix(
    samples: Sequence[tuple[ConceptVector, str]],
    class_labels: Sequence[str],
) -> tuple[np.ndarray, np.ndarray, str]:
    if not samples:
        raise EmptyDataset("no training samples")
    concept_set_id = samples[0][0].concept_set_id
    for vec, _ in samples:
        if vec.concept_set_id != concept_set_id:
            raise InconsistentConceptSet(
                f"samples mix concept sets {concept_set_id!r} and {vec.concept_set_id!r}"
            )
    label_to_index = {label: i for i, label in enumerate(class_labels)}
    X = np.stack([vec.normalized for vec, _ in samples])
    try:
        y = np.array([label_to_index[label] for _, label in samples], dtype=np.intp)
    except KeyError as exc:
        raise EmptyClass(f"sample label {exc} is not among class labels {list(class_labels)}") from None
    return X, y, concept_set_id


def loss_and_gradients(
    W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2_weight: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Loss plus analytic gradients dL/dW and dL/db."""
    N = X.shape[0]
    Z = X @ W.T + b  # (N, C)
    Z_shift = Z - Z.max(axis=1, keepdims=True)
    expZ = np.exp(Z_shift)
    P = expZ / expZ.sum(axis=1, keepdims=True)
    log_probs = Z_shift - np.log(expZ.sum(axis=1, keepdims=True))
    loss = -float(log_probs[np.arange(N), y].mean()) + 0.5 * l2_weight * float((W * W).sum())
    G = P.copy()
    G[np.arange(N), y] -= 1.0
    G /= N
    dW = G.T @ X + l2_weight * W
    db = G.sum(axis=0)
    return loss, dW, db


def loss_only(W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2_weight: float) -> float:
    return loss_and_gradients(W, b, X, y, l2_weight)[0]


def train(
    samples: Sequence[tuple[ConceptVector, str]],
    hyper: TrainConfig | None = None,
    class_labels: Sequence[str] | None = None,
) -> LinearClassifier:
    """Fit a linear classifier on normalized concept vectors.

    When class_labels is omitted it defaults to the sorted unique sample
    labels. When given explicitly, every listed class must have at least one
    sample (EmptyClass otherwise).
    """
    hyper = hyper or TrainConfig()
    if not samples:
        raise EmptyDataset("no training samples")
    seen = {label for _, label in samples}
    if class_labels is None:
        class_labels = sorted(seen)
    else:
        class_labels = list(class_labels)
        missing = [label for label in class_labels if label not in seen]
        if missing:
            raise EmptyClass(f"no samples for class(es): {missing}")
    if len(class_labels) < 2:
        raise EmptyClass("training requires at least two classes")

    X, y, concept_set_id = _design_matrix(samples, class_labels)
    C, K = len(class_labels), X.shape[1]
    W = np.zeros((C, K))
    b = np.zeros(C)
    for _ in range(hyper.epochs):
        _, dW, db = loss_and_gradients(W, b, X, y, hyper.l2_weight)
        W -= hyper.learning_rate * dW
        b -= hyper.learning_rate * db
    return LinearClassifier(
        concept_set_id=concept_set_id, class_labels=tuple(class_labels), W=W, b=b
    )


def evaluate(
    model: LinearClassifier, samples: Sequence[tuple[ConceptVector, str]]
) -> EvalMetrics:
    """Accuracy, per-class precision/recall, and a confusion matrix (rows = truth)."""
    if not samples:
        raise EmptyDataset("no evaluation samples")
    C = len(model.class_labels)
    label_to_index = {label: i for i, label in enumerate(model.class_labels)}
    confusion = np.zeros((C, C), dtype=np.int64)
    for vec, label in samples:
        truth = label_to_index[label]
        predicted = label_to_index[classify(model, vec).predicted_label]
        confusion[truth, predicted] += 1
    correct = int(np.trace(confusion))
    precision, recall = {}, {}
    for i, label in enumerate(model.class_labels):
        predicted_count = int(confusion[:, i].sum())
        truth_count = int(confusion[i, :].sum())
        precision[label] = float(confusion[i, i]) / predicted_count if predicted_count else 0.0
        recall[label] = float(confusion[i, i]) / truth_count if truth_count else 0.0
    return EvalMetrics(
        accuracy=correct / len(samples),
        precision=precision,
        recall=recall,
        confusion=confusion,
        class_labels=model.class_labels,
    )
