"""Domain types for the concept-bottleneck pipeline.

Arrays are float64 numpy and treated as immutable once a value is built.
"""

from dataclasses import dataclass, field

import numpy as np

DEFAULT_CLASS_LABELS = ("Pneumonia", "COVID-19", "Normal")

# canonical knowledge-store id per class label
STORE_FOR_LABEL = {"Pneumonia": "pneumonia", "COVID-19": "covid19", "Normal": "normal"}


@dataclass(frozen=True)
class Concept:
    concept_id: str
    name: str
    prompt_text: str


@dataclass(frozen=True)
class ConceptSet:
    id: str
    concepts: tuple[Concept, ...]

    def __post_init__(self):
        if not self.concepts:
            raise ValueError("concept set must be non-empty")
        ids = [c.concept_id for c in self.concepts]
        if len(set(ids)) != len(ids):
            raise ValueError("concept ids must be unique")
        for c in self.concepts:
            if not c.prompt_text.strip():
                raise ValueError(f"concept {c.concept_id!r} has empty prompt text")

    def __len__(self) -> int:
        return len(self.concepts)

    @property
    def ids(self) -> list[str]:
        return [c.concept_id for c in self.concepts]

    def index_of(self, concept_id: str) -> int:
        for i, c in enumerate(self.concepts):
            if c.concept_id == concept_id:
                return i
        raise KeyError(concept_id)


@dataclass
class ConceptEmbeddings:
    concept_set_id: str
    matrix: np.ndarray  # (K, d)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        if self.matrix.ndim != 2:
            raise ValueError("concept embedding matrix must be 2-D (K, d)")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("concept embeddings contain non-finite values")


@dataclass
class SimilarityMatrix:
    """Token x concept cosine similarities with the token grid geometry."""

    values: np.ndarray  # (T, K), entries in [-1, 1]
    grid_h: int
    grid_w: int

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError("similarity matrix must be 2-D (T, K)")
        if self.grid_h < 1 or self.grid_w < 1:
            raise ValueError("grid dimensions must be >= 1")
        if self.values.shape[0] != self.grid_h * self.grid_w:
            raise ValueError(
                f"row count {self.values.shape[0]} != grid {self.grid_h}x{self.grid_w}"
            )
        if self.values.size and (self.values.min() < -1.0 or self.values.max() > 1.0):
            raise ValueError("similarity entries must lie in [-1, 1]")


@dataclass
class ConceptVector:
    """Per-concept activations: raw in [-1, 1] and normalized in [0, 1]."""

    concept_set_id: str
    raw: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        self.raw = np.asarray(self.raw, dtype=np.float64)
        self.normalized = np.asarray(self.normalized, dtype=np.float64)
        if self.raw.shape != self.normalized.shape or self.raw.ndim != 1:
            raise ValueError("raw and normalized must be 1-D arrays of equal length")
        if self.raw.size and (self.raw.min() < -1.0 - 1e-9 or self.raw.max() > 1.0 + 1e-9):
            raise ValueError("raw activations must lie in [-1, 1]")
        if not np.allclose(self.normalized, (self.raw + 1.0) / 2.0, atol=1e-9):
            raise ValueError("normalized must equal (raw + 1) / 2")


@dataclass
class LinearClassifier:
    """The entire learned model: weights W (C x K) and bias b (C)."""

    concept_set_id: str
    class_labels: tuple[str, ...]
    W: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        self.class_labels = tuple(self.class_labels)
        self.W = np.asarray(self.W, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        C = len(self.class_labels)
        if C < 2:
            raise ValueError("need at least two class labels")
        if len(set(self.class_labels)) != C:
            raise ValueError("class labels must be unique")
        if self.W.ndim != 2 or self.W.shape[0] != C:
            raise ValueError(f"W must have shape ({C}, K)")
        if self.b.shape != (C,):
            raise ValueError(f"b must have shape ({C},)")

    @property
    def num_concepts(self) -> int:
        return self.W.shape[1]

    def label_index(self, label: str) -> int:
        try:
            return self.class_labels.index(label)
        except ValueError:
            raise KeyError(label) from None


@dataclass
class Prediction:
    logits: np.ndarray
    probabilities: np.ndarray
    predicted_label: str

    def __post_init__(self):
        self.logits = np.asarray(self.logits, dtype=np.float64)
        self.probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if self.probabilities.min() < 0:
            raise ValueError("probabilities must be non-negative")
        if abs(float(self.probabilities.sum()) - 1.0) > 1e-6:
            raise ValueError("probabilities must sum to 1 within 1e-6")


@dataclass
class ContributionScores:
    """Additive explanation of one class logit: sum(per_concept) + bias == logit."""

    class_label: str
    per_concept: np.ndarray
    bias: float

    def __post_init__(self):
        self.per_concept = np.asarray(self.per_concept, dtype=np.float64)

    @property
    def logit(self) -> float:
        return float(self.per_concept.sum() + self.bias)


@dataclass
class SaliencyMap:
    concept_id: str
    grid: np.ndarray  # (grid_h, grid_w), entries in [0, 1]

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim != 2:
            raise ValueError("saliency grid must be 2-D")
        if self.grid.size and (self.grid.min() < 0.0 or self.grid.max() > 1.0):
            raise ValueError("saliency entries must lie in [0, 1]")


@dataclass
class EvalMetrics:
    accuracy: float
    precision: dict[str, float]
    recall: dict[str, float]
    confusion: np.ndarray  # (C, C), rows = truth
    class_labels: tuple[str, ...] = field(default_factory=tuple)
