#!/usr/bin/env python3
"""Regenerate the packaged demo image and demo classifier (idempotent).

The demo classifier is deliberately structured: each class carries weight 4.0
on one signature concept plus two 1.0 support weights, zero bias. Setting the
signature concept of any class to 1 and the other signatures to 0 forces that
class, which the end-to-end tests rely on.
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "cbmrag" / "data"

SIGNATURES = {
    0: [(0, 4.0), (7, 1.0), (4, 1.0)],  # Pneumonia: consolidation, lobar_opacity, air_bronchogram
    1: [(1, 4.0), (5, 1.0), (6, 1.0)],  # COVID-19: ground_glass, bilateral_infiltrates, peripheral_distribution
    2: [(2, 4.0), (17, 1.0), (18, 1.0)],  # Normal: clear_lungs, normal_cardiac_silhouette, sharp_costophrenic_angles
}


def write_classifier():
    K = 20
    W = [[0.0] * K for _ in range(3)]
    for class_index, entries in SIGNATURES.items():
        for concept_index, weight in entries:
            W[class_index][concept_index] = weight
    payload = {
        "concept_set_id": "cxr-default-20",
        "class_labels": ["Pneumonia", "COVID-19", "Normal"],
        "W": W,
        "b": [0.0, 0.0, 0.0],
        "format_version": 1,
    }
    out = DATA_DIR / "demo_classifier.json"
    out.write_text(json.dumps(payload, indent=1) + "\n")
    print(f"wrote {out}")


def write_image():
    rng = np.random.default_rng(20240101)
    base = np.zeros((64, 64))
    yy, xx = np.mgrid[0:64, 0:64]
    for cx in (20, 44):  # two bright "lung field" ellipses
        mask = ((xx - cx) / 12.0) ** 2 + ((yy - 32) / 22.0) ** 2 <= 1.0
        base[mask] += 0.55
    base += 0.15 + 0.08 * rng.random((64, 64))
    image = Image.fromarray((np.clip(base, 0, 1) * 255).astype(np.uint8), mode="L")
    out = DATA_DIR / "demo_image.png"
    image.save(out, optimize=False)
    print(f"wrote {out}")


if __name__ == "__main__":
    write_classifier()
    write_image()
