"""Typed configuration for the engine, loadable from YAML/JSON with overrides.

Every retrieval knob is exposed here and mirrored by CLI flags; defaults are
the production settings (k=5, fanouts 3k and ceil(2k/5), fusion weights
0.25/0.25/0.5, eta=60, 500-char windows).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

import yaml

LLM_API_KEY_ENV = "PATHRAG_LLM_API_KEY"
EMBED_API_KEY_ENV = "PATHRAG_EMBED_API_KEY"


class ConfigError(ValueError):
    """Raised for unknown keys or invalid configuration values."""


@dataclass
class EmbedderConfig:
    kind: str = "hashed"  # hashed | remote
    dim: int = 64
    seed: int = 42
    endpoint: str | None = None
    model: str | None = None
    batch_size: int = 32
    # How a path becomes one vector: mean of per-tag embeddings, or the
    # embedding of the joined display string.
    path_embedding: str = "mean_tags"  # mean_tags | joined_string


@dataclass
class LlmConfig:
    kind: str = "null"  # remote | null
    endpoint: str | None = None
    model: str | None = None
    temperature: float = 0.0
    max_in_flight: int = 4
    timeout_s: float = 60.0


@dataclass
class TaggerConfig:
    kind: str = "heuristic"  # heuristic | llm
    max_master_tags: int = 5
    domain: str = "general"


@dataclass
class ChunkingConfig:
    window_chars: int = 500
    overlap_chars: int = 0


@dataclass
class RetrievalConfig:
    k: int = 5
    tag_fanout_multiplier: int = 3
    sparse_fanout: int | None = None  # None -> ceil(2k/5)
    weight_tag: float = 0.25
    weight_semantic: float = 0.25
    weight_sparse: float = 0.5
    eta: float = 60.0
    max_subqueries: int = 5
    pruning_enabled: bool = True
    expansion_enabled: bool = True
    # Contribution of a source a candidate is missing from: "zero" drops the
    # term, "worst_rank" charges eta + worst observed rank + 1.
    missing_rank_policy: str = "zero"
    concurrency: int = 1

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ConfigError("retrieval.k must be >= 1")
        if self.eta <= 0:
            raise ConfigError("retrieval.eta must be > 0")
        if min(self.weight_tag, self.weight_semantic, self.weight_sparse) < 0:
            raise ConfigError("retrieval weights must be non-negative")

    def weights(self) -> tuple[float, float, float]:
        return (self.weight_tag, self.weight_semantic, self.weight_sparse)

    def tag_fanout(self, k: int | None = None) -> int:
        return self.tag_fanout_multiplier * (k if k is not None else self.k)

    def effective_sparse_fanout(self, k: int | None = None) -> int:
        if self.sparse_fanout is not None:
            return self.sparse_fanout
        return math.ceil(2 * (k if k is not None else self.k) / 5)


@dataclass
class IndexConfig:
    dense_metric: str = "cosine"
    tag_metric: str = "l2"
    # Stores at or below this size answer searches by exact brute force;
    # larger stores switch to the graph-based approximate index.
    ann_threshold: int = 100_000
    ann_m: int = 16
    ann_ef_construction: int = 100
    ann_ef_search: int = 64
    ann_seed: int = 42


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    api_token: str | None = None
    static_dir: str | None = None


@dataclass
class EvalConfig:
    retrieval_ks: tuple[int, ...] = (3, 5, 10)
    generation_k: int = 5
    concurrency: int = 1


@dataclass
class EngineConfig:
    embedder: EmbedderConfig = field(default_factory=EmbedderConfig)
    llm: LlmConfig = field(default_factory=LlmConfig)
    tagger: TaggerConfig = field(default_factory=TaggerConfig)
    chunking: ChunkingConfig = field(default_factory=ChunkingConfig)
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    index: IndexConfig = field(default_factory=IndexConfig)
    server: ServerConfig = field(default_factory=ServerConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)
    prompt_dir: str | None = None
    prompt_budget: int = 24_000

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


_SECTIONS = {
    "embedder": EmbedderConfig,
    "llm": LlmConfig,
    "tagger": TaggerConfig,
    "chunking": ChunkingConfig,
    "retrieval": RetrievalConfig,
    "index": IndexConfig,
    "server": ServerConfig,
    "eval": EvalConfig,
}


def _build_section(cls: type, data: dict[str, Any], prefix: str) -> Any:
    known = {f.name: f for f in fields(cls)}
    kwargs: dict[str, Any] = {}
    for key, value in data.items():
        if key not in known:
            raise ConfigError(f"unknown config key {prefix}.{key}")
        if known[key].name == "retrieval_ks" and isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    return cls(**kwargs)


def config_from_dict(data: dict[str, Any]) -> EngineConfig:
    cfg = EngineConfig()
    for key, value in data.items():
        if key in _SECTIONS:
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key} must be a mapping")
            setattr(cfg, key, _build_section(_SECTIONS[key], value, key))
        elif key in ("prompt_dir", "prompt_budget"):
            setattr(cfg, key, value)
        else:
            raise ConfigError(f"unknown config key {key}")
    return cfg


def apply_overrides(cfg: EngineConfig, overrides: dict[str, Any]) -> EngineConfig:
    """Apply dotted-key overrides, e.g. {"retrieval.k": 3}."""
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        target: Any = cfg
        for part in parts[:-1]:
            if not hasattr(target, part):
                raise ConfigError(f"unknown config key {dotted}")
            target = getattr(target, part)
        leaf = parts[-1]
        if not hasattr(target, leaf):
            raise ConfigError(f"unknown config key {dotted}")
        current = getattr(target, leaf)
        if current is not None and not isinstance(value, type(current)):
            try:
                value = type(current)(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {dotted}: {value!r}") from exc
        setattr(target, leaf, value)
    return cfg


def load_config(path: str | Path | None = None,
                overrides: dict[str, Any] | None = None) -> EngineConfig:
    """Load configuration from a YAML or JSON file, then apply overrides."""
    if path is None:
        cfg = EngineConfig()
    else:
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix == ".json":
            data = json.loads(text)
        else:
            data = yaml.safe_load(text) or {}
        if not isinstance(data, dict):
            raise ConfigError("config file must contain a mapping")
        cfg = config_from_dict(data)
    if overrides:
        apply_overrides(cfg, overrides)
    return cfg
