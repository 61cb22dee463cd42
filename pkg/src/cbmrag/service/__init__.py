from .app import create_app, create_app_from_config
from .config import AppConfig, build_providers, load_config
from .heatmap import render_png, upsample_bilinear
from .pipeline import AppState, embed_concept_set
from .sessions import Session, SessionAnalysis, SessionStore

__all__ = [
    "AppConfig",
    "AppState",
    "Session",
    "SessionAnalysis",
    "SessionStore",
    "build_providers",
    "create_app",
    "create_app_from_config",
    "embed_concept_set",
    "load_config",
    "render_png",
    "upsample_bilinear",
]
