"""Concept-set bootstrapping: ask the completion model for concepts, fall back
to the curated default file when the reply yields too few usable lines."""

import logging
import re
from pathlib import Path
from typing import Sequence

from ..cbm.io import load_concept_set
from ..cbm.types import Concept, ConceptSet
from ..providers.base import Completer
from ..providers.types import ChatMessage
from .prompts import PromptLibrary

logger = logging.getLogger(__name__)

MIN_VALID_CONCEPTS = 5

# one concept per line: id | name | prompt_text
_LINE_RE = re.compile(r"^\s*([A-Za-z0-9_\-]+)\s*\|\s*([^|]+?)\s*\|\s*([^|]+?)\s*$")

_DEFAULT_CONCEPTS_PATH = Path(__file__).resolve().parent.parent / "data" / "concepts_default.json"


def load_default_concept_set() -> ConceptSet:
    """The curated fallback set shipped with the package (demo data, not a
    canonical clinical vocabulary)."""
    return load_concept_set(_DEFAULT_CONCEPTS_PATH)


def parse_concept_lines(text: str) -> list[Concept]:
    """Keep well-formed 'id | name | prompt_text' lines, first occurrence per id."""
    concepts: list[Concept] = []
    seen: set[str] = set()
    for line in text.splitlines():
        match = _LINE_RE.match(line)
        if not match:
            continue
        concept_id, name, prompt_text = match.groups()
        if concept_id in seen:
            continue
        seen.add(concept_id)
        concepts.append(Concept(concept_id=concept_id, name=name, prompt_text=prompt_text))
    return concepts


def generate_concept_set(
    class_labels: Sequence[str],
    completer: Completer,
    prompts: PromptLibrary | None = None,
    concept_set_id: str = "generated",
) -> ConceptSet:
    if not class_labels:
        raise ValueError("class_labels must be non-empty")
    prompts = prompts or PromptLibrary()
    request = prompts.get("concept_generation").format(labels=", ".join(class_labels))
    reply = completer.complete([ChatMessage(role="user", content=request)])
    concepts = parse_concept_lines(reply)
    if len(concepts) < MIN_VALID_CONCEPTS:
        logger.warning(
            "concept generation produced %d valid concepts (< %d); using the curated default set",
            len(concepts),
            MIN_VALID_CONCEPTS,
        )
        return load_default_concept_set()
    return ConceptSet(id=concept_set_id, concepts=tuple(concepts))
