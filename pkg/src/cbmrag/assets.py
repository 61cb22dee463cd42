"""Accessors for the data files shipped inside the package.

Everything under data/ is demo material: the curated concept list, a
hand-structured demo classifier whose class weights are disjoint (so score
edits can force any class), a synthetic knowledge corpus, a deterministic
demo image, and a short scripted-completion file for offline runs.
"""

from pathlib import Path

_DATA_DIR = Path(__file__).resolve().parent / "data"


def data_dir() -> Path:
    return _DATA_DIR


def default_concepts_path() -> Path:
    return _DATA_DIR / "concepts_default.json"


def demo_classifier_path() -> Path:
    return _DATA_DIR / "demo_classifier.json"


def demo_image_path() -> Path:
    return _DATA_DIR / "demo_image.png"


def demo_image_bytes() -> bytes:
    return demo_image_path().read_bytes()


def demo_script_path() -> Path:
    return _DATA_DIR / "demo_script.json"


def corpus_dir() -> Path:
    return _DATA_DIR / "corpus"


def prompts_dir() -> Path:
    return _DATA_DIR / "prompts"
