from .io import (
    load_classifier,
    load_concept_set,
    load_projection,
    save_classifier,
    save_concept_set,
)
from .ops import (
    classify,
    concept_vector,
    contribution_matrix,
    contributions,
    image_token_matrix,
    normalize_concepts,
    pool_concepts,
    saliency,
    similarity_matrix,
    softmax,
)
from .train import TrainConfig, evaluate, loss_and_gradients, loss_only, train
from .types import (
    Concept,
    ConceptEmbeddings,
    ConceptSet,
    ConceptVector,
    ContributionScores,
    DEFAULT_CLASS_LABELS,
    EvalMetrics,
    LinearClassifier,
    Prediction,
    SaliencyMap,
    SimilarityMatrix,
    STORE_FOR_LABEL,
)

__all__ = [
    "Concept",
    "ConceptEmbeddings",
    "ConceptSet",
    "ConceptVector",
    "ContributionScores",
    "DEFAULT_CLASS_LABELS",
    "EvalMetrics",
    "LinearClassifier",
    "Prediction",
    "SaliencyMap",
    "SimilarityMatrix",
    "STORE_FOR_LABEL",
    "TrainConfig",
    "classify",
    "concept_vector",
    "contribution_matrix",
    "contributions",
    "evaluate",
    "image_token_matrix",
    "load_classifier",
    "load_concept_set",
    "load_projection",
    "loss_and_gradients",
    "loss_only",
    "normalize_concepts",
    "pool_concepts",
    "saliency",
    "save_classifier",
    "save_concept_set",
    "similarity_matrix",
    "softmax",
    "train",
]
