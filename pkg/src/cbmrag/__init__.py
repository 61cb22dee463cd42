"""Interpretable chest X-ray analysis: concept-bottleneck classification with
retrieval-augmented multi-agent report generation."""

__version__ = "0.1.0"
