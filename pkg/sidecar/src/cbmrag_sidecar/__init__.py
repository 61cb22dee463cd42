from .backends import BackendConfig, BackendError, StubBackend, load_backend
from .server import SidecarConfig, create_app, load_sidecar_config

__all__ = [
    "BackendConfig",
    "BackendError",
    "SidecarConfig",
    "StubBackend",
    "create_app",
    "load_backend",
    "load_sidecar_config",
]
