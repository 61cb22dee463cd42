#!/usr/bin/env python3
"""End-to-end offline demo: fixture providers, packaged demo assets.

Builds the disease stores from the packaged synthetic corpus in a temp
directory, analyzes the demo image, prints the top concepts, and generates a
report with the scripted completion oracle.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

from cbmrag import assets
from cbmrag.agents import run_report_pipeline
from cbmrag.cbm import (
    ConceptEmbeddings,
    classify,
    concept_vector,
    contributions,
    load_classifier,
    load_concept_set,
    similarity_matrix,
)
from cbmrag.providers import FixtureImageEmbedder, FixtureTextEmbedder, ScriptedCompleter
from cbmrag.store import ChunkEmbeddingIndex, StoreCatalog


def main():
    embedder = FixtureTextEmbedder(dim=8)
    image_embedder = FixtureImageEmbedder(grid_h=14, grid_w=14, dim=8)
    concept_set = load_concept_set(assets.default_concepts_path())
    model = load_classifier(assets.demo_classifier_path())

    vectors = embedder.embed_text([c.prompt_text for c in concept_set.concepts])
    concept_embeddings = ConceptEmbeddings(
        concept_set.id, np.asarray([v.values for v in vectors])
    )

    with tempfile.TemporaryDirectory() as tmp:
        catalog = StoreCatalog(persist_dir=Path(tmp))
        for store_id in ("pneumonia", "covid19", "normal"):
            for doc in sorted((assets.corpus_dir() / store_id).glob("*.md")):
                catalog.ingest_document(store_id, doc.name, doc.read_text(), embedder)

        tokens = image_embedder.embed_image(assets.demo_image_bytes(), "image/png")
        S = similarity_matrix(tokens, concept_embeddings)
        vec = concept_vector(concept_set.id, S)
        prediction = classify(model, vec)
        contribs = contributions(model, vec, prediction.predicted_label)

        print(f"predicted: {prediction.predicted_label}")
        print("probabilities:", {
            label: round(float(p), 4)
            for label, p in zip(model.class_labels, prediction.probabilities)
        })
        order = sorted(
            range(len(concept_set)),
            key=lambda j: (-abs(float(contribs.per_concept[j])), j),
        )
        print("top concepts by |contribution|:")
        for j in order[:5]:
            concept = concept_set.concepts[j]
            print(
                f"  {concept.name:<30} score={vec.normalized[j]:.3f} "
                f"contribution={contribs.per_concept[j]:+.3f}"
            )

        completer = ScriptedCompleter.from_file(assets.demo_script_path())
        bundle = run_report_pipeline(
            prediction, contribs, concept_set, catalog, completer, embedder
        )
        print("\n--- report ---")
        print(json.dumps(
            {k: v for k, v in bundle.to_dict().items() if k != "traces"}, indent=2
        ))
        print(f"traces: {[t.agent_name for t in bundle.traces]}")


if __name__ == "__main__":
    main()
