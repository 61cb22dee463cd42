"""Service configuration: TOML file plus CBMRAG_-prefixed environment overrides.

Override names use double underscores for nesting, e.g.

    CBMRAG_SERVER__PORT=9000
    CBMRAG_PROVIDERS__TEXT__MODE=http
"""

import os
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # py >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .. import assets
from ..providers import (
    FixtureImageEmbedder,
    FixtureTextEmbedder,
    FixtureTranscriber,
    HttpProvider,
    ProviderBundle,
    ProviderConfig,
    ScriptedCompleter,
)

ENV_PREFIX = "CBMRAG_"


@dataclass
class CapabilityConfig:
    """One neural capability: fixture, http, or scripted (completion only)."""

    mode: str = "fixture"
    # fixture embedders
    dim: int = 8
    grid_h: int = 14
    grid_w: int = 14
    transcripts: dict[str, str] = field(default_factory=dict)
    # remote endpoints
    endpoint: str = ""
    model: str = ""
    timeout: float = 30.0
    max_retries: int = 2
    auth_token_env: str = ""
    # scripted completions
    script_path: str = ""
    loop_script: bool = False


@dataclass
class PathsConfig:
    stores_dir: str = "stores"
    sessions_dir: str = "sessions"
    model_path: str = ""  # empty -> packaged demo classifier
    concepts_path: str = ""  # empty -> packaged curated set
    projection_path: str = ""  # optional text->image space projection
    prompts_dir: str = ""  # empty -> packaged prompts


@dataclass
class ChunkingConfig:
    max_chars: int = 1000
    overlap: int = 200


@dataclass
class AgentsConfig:
    max_iterations: int = 8
    history_turns: int = 20
    top_concepts: int = 5
    retrieval_k: int = 4
    upload_hits_k: int = 3


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080


@dataclass
class AppConfig:
    text: CapabilityConfig = field(default_factory=CapabilityConfig)
    image: CapabilityConfig = field(default_factory=CapabilityConfig)
    transcribe: CapabilityConfig = field(default_factory=CapabilityConfig)
    complete: CapabilityConfig = field(default_factory=lambda: CapabilityConfig(mode="scripted"))
    paths: PathsConfig = field(default_factory=PathsConfig)
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    agents: AgentsConfig = field(default_factory=AgentsConfig)
    server: ServerConfig = field(default_factory=ServerConfig)

    def resolved_model_path(self) -> Path:
        return Path(self.paths.model_path) if self.paths.model_path else assets.demo_classifier_path()

    def resolved_concepts_path(self) -> Path:
        return Path(self.paths.concepts_path) if self.paths.concepts_path else assets.default_concepts_path()

    def resolved_script_path(self) -> Path:
        return Path(self.complete.script_path) if self.complete.script_path else assets.demo_script_path()


def _apply_overrides(data: dict, overrides: dict[str, str]) -> None:
    for raw_key, raw_value in overrides.items():
        parts = [p.lower() for p in raw_key.split("__") if p]
        node = data
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f"cannot override non-table config key {part!r}")
        node[parts[-1]] = _coerce(raw_value)


def _coerce(value: str):
    lowered = value.strip().lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    try:
        return int(value)
    except ValueError:
        pass
    try:
        return float(value)
    except ValueError:
        pass
    return value


def _build_section(cls, data: dict, where: str):
    kwargs = {}
    valid = {f for f in cls.__dataclass_fields__}
    for key, value in data.items():
        if key not in valid:
            raise ValueError(f"unknown config key {where}.{key}")
        kwargs[key] = value
    return cls(**kwargs)


def load_config(path: Path | str | None = None, env: dict[str, str] | None = None) -> AppConfig:
    """Parse the TOML file (optional) and apply environment overrides."""
    data: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    env = dict(os.environ if env is None else env)
    overrides = {
        key[len(ENV_PREFIX):]: value
        for key, value in env.items()
        if key.startswith(ENV_PREFIX)
    }
    _apply_overrides(data, overrides)

    providers = data.get("providers", {})
    config = AppConfig(
        text=_build_section(CapabilityConfig, providers.get("text", {}), "providers.text"),
        image=_build_section(CapabilityConfig, providers.get("image", {}), "providers.image"),
        transcribe=_build_section(
            CapabilityConfig, providers.get("transcribe", {}), "providers.transcribe"
        ),
        complete=_build_section(
            CapabilityConfig,
            {"mode": "scripted", **providers.get("complete", {})},
            "providers.complete",
        ),
        paths=_build_section(PathsConfig, data.get("paths", {}), "paths"),
        chunking=_build_section(ChunkingConfig, data.get("chunking", {}), "chunking"),
        agents=_build_section(AgentsConfig, data.get("agents", {}), "agents"),
        server=_build_section(ServerConfig, data.get("server", {}), "server"),
    )
    return config


def _http_provider(cap: CapabilityConfig) -> HttpProvider:
    return HttpProvider(
        ProviderConfig(
            endpoint=cap.endpoint,
            model_name=cap.model,
            timeout=cap.timeout,
            max_retries=cap.max_retries,
            auth_token_env=cap.auth_token_env,
        )
    )


def build_providers(config: AppConfig) -> ProviderBundle:
    if config.text.mode == "fixture":
        text = FixtureTextEmbedder(dim=config.text.dim)
    elif config.text.mode == "http":
        text = _http_provider(config.text)
    else:
        raise ValueError(f"providers.text.mode must be fixture|http, got {config.text.mode!r}")

    if config.image.mode == "fixture":
        image = FixtureImageEmbedder(
            grid_h=config.image.grid_h, grid_w=config.image.grid_w, dim=config.image.dim
        )
    elif config.image.mode == "http":
        image = _http_provider(config.image)
    else:
        raise ValueError(f"providers.image.mode must be fixture|http, got {config.image.mode!r}")

    if config.transcribe.mode == "fixture":
        transcriber = FixtureTranscriber(transcripts=config.transcribe.transcripts)
    elif config.transcribe.mode == "http":
        transcriber = _http_provider(config.transcribe)
    else:
        raise ValueError(
            f"providers.transcribe.mode must be fixture|http, got {config.transcribe.mode!r}"
        )

    if config.complete.mode == "scripted":
        completer = ScriptedCompleter.from_file(
            config.resolved_script_path(), loop=config.complete.loop_script
        )
    elif config.complete.mode == "http":
        completer = _http_provider(config.complete)
    else:
        raise ValueError(
            f"providers.complete.mode must be scripted|http, got {config.complete.mode!r}"
        )

    return ProviderBundle(
        text_embedder=text, image_embedder=image, transcriber=transcriber, completer=completer
    )
