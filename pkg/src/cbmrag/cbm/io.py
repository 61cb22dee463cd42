"""JSON persistence for classifiers, concept sets, and projection matrices."""

from pathlib import Path

import numpy as np

from .. import jsonio
from ..errors import CorruptFile, IoFailure
from .types import Concept, ConceptSet, LinearClassifier

FORMAT_VERSION = 1


def save_classifier(model: LinearClassifier, path: Path | str) -> None:
    jsonio.dump_file(
        {
            "concept_set_id": model.concept_set_id,
            "class_labels": list(model.class_labels),
            "W": [[float(v) for v in row] for row in model.W],
            "b": [float(v) for v in model.b],
            "format_version": FORMAT_VERSION,
        },
        path,
    )


def load_classifier(path: Path | str) -> LinearClassifier:
    try:
        payload = jsonio.load_file(path)
    except OSError as exc:
        raise IoFailure(f"cannot read classifier file {path}: {exc}") from exc
    except ValueError as exc:
        raise CorruptFile(f"classifier file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise CorruptFile(
            f"classifier file {path}: unsupported format_version "
            f"{payload.get('format_version') if isinstance(payload, dict) else '?'}"
        )
    try:
        return LinearClassifier(
            concept_set_id=payload["concept_set_id"],
            class_labels=tuple(payload["class_labels"]),
            W=np.asarray(payload["W"], dtype=np.float64),
            b=np.asarray(payload["b"], dtype=np.float64),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"classifier file {path} has a bad schema: {exc}") from exc


def save_concept_set(concept_set: ConceptSet, path: Path | str) -> None:
    jsonio.dump_file(
        {
            "id": concept_set.id,
            "concepts": [
                {"concept_id": c.concept_id, "name": c.name, "prompt_text": c.prompt_text}
                for c in concept_set.concepts
            ],
            "format_version": FORMAT_VERSION,
        },
        path,
    )


def load_concept_set(path: Path | str) -> ConceptSet:
    try:
        payload = jsonio.load_file(path)
    except OSError as exc:
        raise IoFailure(f"cannot read concept set file {path}: {exc}") from exc
    except ValueError as exc:
        raise CorruptFile(f"concept set file {path} is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format_version") != FORMAT_VERSION:
        raise CorruptFile(f"concept set file {path}: unsupported format_version")
    try:
        return ConceptSet(
            id=payload["id"],
            concepts=tuple(
                Concept(c["concept_id"], c["name"], c["prompt_text"])
                for c in payload["concepts"]
            ),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptFile(f"concept set file {path} has a bad schema: {exc}") from exc


def load_projection(path: Path | str) -> np.ndarray:
    """Projection matrix (d_text x d_image) mapping text vectors into image space."""
    try:
        payload = jsonio.load_file(path)
    except OSError as exc:
        raise IoFailure(f"cannot read projection file {path}: {exc}") from exc
    except ValueError as exc:
        raise CorruptFile(f"projection file {path} is not valid JSON: {exc}") from exc
    matrix = payload.get("matrix") if isinstance(payload, dict) else None
    if matrix is None:
        raise CorruptFile(f"projection file {path} must contain a 'matrix' field")
    P = np.asarray(matrix, dtype=np.float64)
    if P.ndim != 2 or not np.all(np.isfinite(P)):
        raise CorruptFile(f"projection file {path}: matrix must be 2-D and finite")
    return P
