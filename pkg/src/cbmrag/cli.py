"""Command-line entry points: ingest, train, run, serve.

JSON results go to stdout; logs and errors go to stderr. Exit codes: 0 on
success, 1 on runtime failure, 2 on usage/validation failure.
"""

import csv
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click

from . import assets, jsonio
from .agents.roles import run_report_pipeline
from .cbm import (
    ConceptVector,
    DEFAULT_CLASS_LABELS,
    TrainConfig,
    classify,
    concept_vector,
    contributions,
    evaluate,
    load_classifier,
    load_concept_set,
    save_classifier,
    similarity_matrix,
    train,
)
from .errors import CbmRagError
from .service.config import build_providers, load_config
from .service.pipeline import embed_concept_set
from .store import DISEASE_STORE_IDS, ChunkEmbeddingIndex, StoreCatalog

USAGE_EXIT = 2
RUNTIME_EXIT = 1


def _fail_usage(message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(USAGE_EXIT)


def _fail_runtime(message: str):
    click.echo(json.dumps({"error": message}), err=True)
    sys.exit(RUNTIME_EXIT)


def _load_app_config(config_path: str | None):
    try:
        return load_config(config_path)
    except FileNotFoundError as exc:
        _fail_usage(str(exc))
    except Exception as exc:
        # includes TOML parse errors, which carry line/column context
        _fail_runtime(f"invalid config file: {exc}")


@click.group()
def main():
    """Interpretable chest X-ray analysis toolkit."""


@main.command("ingest")
@click.option("--corpus-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--store-dir", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--max-chars", default=1000, show_default=True)
@click.option("--overlap", default=200, show_default=True)
def cmd_ingest(corpus_dir, store_dir, config_path, max_chars, overlap):
    """Build the three disease stores from a directory of UTF-8 text files.

    CORPUS-DIR must contain pneumonia/, covid19/, and normal/ subdirectories.
    """
    corpus = Path(corpus_dir)
    missing = [s for s in DISEASE_STORE_IDS if not (corpus / s).is_dir()]
    if missing:
        _fail_usage(f"corpus directory is missing subdirectories: {', '.join(missing)}")
    config = _load_app_config(config_path)
    bundle = build_providers(config)
    store_out = Path(store_dir)
    store_out.mkdir(parents=True, exist_ok=True)
    try:
        for store_id in DISEASE_STORE_IDS:
            index = ChunkEmbeddingIndex(store_id)
            total = 0
            for doc_path in sorted((corpus / store_id).glob("**/*")):
                if not doc_path.is_file():
                    continue
                text = doc_path.read_text(encoding="utf-8")
                doc_id = doc_path.relative_to(corpus / store_id).as_posix()
                total += index.ingest_document(
                    doc_id, text, bundle.text_embedder, max_chars=max_chars, overlap=overlap
                )
            index.persist(store_out / f"{store_id}.json")
            click.echo(f"{store_id}: {total} chunks")
    except CbmRagError as exc:
        _fail_runtime(str(exc))


def _read_manifest(manifest_path: Path) -> list[tuple[Path, str]]:
    with open(manifest_path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["path", "label"]:
            _fail_usage(
                f"manifest must have header 'path,label', got {reader.fieldnames}"
            )
        rows = []
        for i, row in enumerate(reader, start=2):
            label = row["label"].strip()
            if label not in DEFAULT_CLASS_LABELS:
                _fail_usage(
                    f"manifest row {i}: unknown label {label!r}; "
                    f"expected one of {list(DEFAULT_CLASS_LABELS)}"
                )
            rows.append((Path(row["path"].strip()), label))
    if not rows:
        _fail_usage("empty dataset: manifest has no rows")
    return rows


@main.command("train")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--concepts", "concepts_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--model-out", required=True, type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--lr", default=0.1, show_default=True)
@click.option("--epochs", default=500, show_default=True)
@click.option("--l2", default=1e-4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--workers", default=4, show_default=True)
def cmd_train(manifest_path, concepts_path, model_out, config_path, lr, epochs, l2, seed, workers):
    """Train the linear classifier from a 'path,label' manifest of images."""
    config = _load_app_config(config_path)
    bundle = build_providers(config)
    concept_set = load_concept_set(concepts_path or config.resolved_concepts_path())
    concept_embeddings = embed_concept_set(concept_set, bundle, None)
    rows = _read_manifest(Path(manifest_path))

    for i, (path, _) in enumerate(rows, start=2):
        if not path.is_file():
            _fail_usage(f"manifest row {i}: unreadable image path {path}")

    def embed_row(row: tuple[Path, str]) -> tuple[ConceptVector, str]:
        path, label = row
        suffix = path.suffix.lower()
        media_type = "image/jpeg" if suffix in (".jpg", ".jpeg") else "image/png"
        tokens = bundle.image_embedder.embed_image(path.read_bytes(), media_type)
        S = similarity_matrix(tokens, concept_embeddings)
        return concept_vector(concept_set.id, S), label

    try:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = list(pool.map(embed_row, rows))  # manifest order preserved
        model = train(
            samples,
            TrainConfig(learning_rate=lr, epochs=epochs, seed=seed, l2_weight=l2),
            class_labels=[l for l in DEFAULT_CLASS_LABELS if any(lbl == l for _, lbl in samples)],
        )
        save_classifier(model, model_out)
        metrics = evaluate(model, samples)
    except CbmRagError as exc:
        _fail_runtime(str(exc))
    click.echo(f"model written to {model_out}", err=True)
    click.echo(
        json.dumps(
            {
                "accuracy": metrics.accuracy,
                "precision": metrics.precision,
                "recall": metrics.recall,
                "confusion": metrics.confusion.tolist(),
                "class_labels": list(metrics.class_labels),
            }
        )
    )


@main.command("run")
@click.option("--image", "image_path", required=True, type=click.Path(dir_okay=False))
@click.option("--model", "model_path", type=click.Path(dir_okay=False))
@click.option("--concepts", "concepts_path", type=click.Path(dir_okay=False))
@click.option("--store-dir", "store_dir", type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--k", default=4, show_default=True, help="retrieval depth for agent tools")
@click.option("--no-report", is_flag=True, help="skip the agent pipeline")
def cmd_run(image_path, model_path, concepts_path, store_dir, config_path, k, no_report):
    """Run the full pipeline on one image and print a JSON document."""
    config = _load_app_config(config_path)
    try:
        image_file = Path(image_path)
        if not image_file.is_file():
            raise CbmRagError(f"image file not found: {image_file}")
        bundle = build_providers(config)
        concept_set = load_concept_set(concepts_path or config.resolved_concepts_path())
        model = load_classifier(model_path or config.resolved_model_path())
        concept_embeddings = embed_concept_set(concept_set, bundle, None)
        suffix = image_file.suffix.lower()
        media_type = "image/jpeg" if suffix in (".jpg", ".jpeg") else "image/png"
        tokens = bundle.image_embedder.embed_image(image_file.read_bytes(), media_type)
        S = similarity_matrix(tokens, concept_embeddings)
        vec = concept_vector(concept_set.id, S)
        prediction = classify(model, vec)
        contribs = contributions(model, vec, prediction.predicted_label)
        order = sorted(
            range(len(concept_set)),
            key=lambda j: (-abs(float(contribs.per_concept[j])), j),
        )
        output = {
            "prediction": {
                "predicted_label": prediction.predicted_label,
                "probabilities": {
                    label: float(p)
                    for label, p in zip(model.class_labels, prediction.probabilities)
                },
            },
            "concepts": [
                {
                    "id": concept_set.concepts[j].concept_id,
                    "name": concept_set.concepts[j].name,
                    "score": float(vec.normalized[j]),
                    "contribution": float(contribs.per_concept[j]),
                }
                for j in order
            ],
        }
        if not no_report:
            catalog = StoreCatalog.bootstrap(
                store_dir or config.paths.stores_dir,
                persist=False,
                max_chars=config.chunking.max_chars,
                overlap=config.chunking.overlap,
            )
            bundle_out = run_report_pipeline(
                prediction,
                contribs,
                concept_set,
                catalog,
                bundle.completer,
                bundle.text_embedder,
                retrieval_k=k,
                clock=lambda: "",  # omit wall-clock time so runs are reproducible
            )
            report = bundle_out.to_dict()
            report.pop("created_at")
            output["report"] = report
    except CbmRagError as exc:
        _fail_runtime(str(exc))
    click.echo(jsonio.dumps(output))


@main.command("serve")
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
def cmd_serve(config_path, host, port):
    """Serve the HTTP API until SIGTERM/SIGINT (drains in-flight requests)."""
    import signal as signal_module

    import uvicorn

    from .service.app import create_app
    from .service.pipeline import AppState

    if config_path is not None and not Path(config_path).is_file():
        _fail_usage(f"config file not found: {config_path}")
    config = _load_app_config(config_path)
    try:
        app = create_app(AppState(config))
    except CbmRagError as exc:
        _fail_runtime(str(exc))
    server = uvicorn.Server(
        uvicorn.Config(
            app,
            host=host or config.server.host,
            port=port if port is not None else config.server.port,
            log_level="warning",
        )
    )

    # uvicorn re-raises the terminating signal after draining; absorb it so a
    # graceful shutdown reports exit code 0
    def _absorb(signum, frame):
        server.should_exit = True

    signal_module.signal(signal_module.SIGTERM, _absorb)
    signal_module.signal(signal_module.SIGINT, _absorb)
    try:
        server.run()
    except SystemExit as exc:  # uvicorn startup failure (e.g. port in use)
        sys.exit(0 if exc.code in (0, None) else RUNTIME_EXIT)
    if not server.started:
        sys.exit(RUNTIME_EXIT)


@main.command("demo-assets")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False))
def cmd_demo_assets(out_dir):
    """Copy the packaged demo corpus/image/script into a working directory."""
    import shutil

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    shutil.copytree(assets.corpus_dir(), out / "corpus", dirs_exist_ok=True)
    shutil.copy(assets.demo_image_path(), out / "demo_image.png")
    shutil.copy(assets.demo_script_path(), out / "demo_script.json")
    shutil.copy(assets.demo_classifier_path(), out / "demo_classifier.json")
    shutil.copy(assets.default_concepts_path(), out / "concepts.json")
    click.echo(f"demo assets copied to {out}")


if __name__ == "__main__":
    main()
