"""Text-to-vector backends and vector arithmetic.

Two embedders: a remote JSON-over-HTTP backend (hosted-API protocol) and a
deterministic feature-hashed bag-of-words backend for offline runs and
reproducible tests. Path vectors are the L2-normalized mean of per-tag
embeddings (configurable to embed the joined path string instead).
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from typing import Protocol, Sequence

import numpy as np

from .config import EMBED_API_KEY_ENV, EmbedderConfig
from .tagging import SemanticPath

logger = logging.getLogger(__name__)

MEAN_TAGS = "mean_tags"
JOINED_STRING = "joined_string"


class EmbeddingError(RuntimeError):
    """Raised on backend failure or dimension mismatch."""


class Embedder(Protocol):
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        """Map a batch of strings to a (len(texts), dim) float64 array,
        output order matching input order."""
        ...

    def fingerprint(self) -> str:
        ...


def l2_normalize(vec: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        return vec.astype(np.float64, copy=True)
    return (vec / norm).astype(np.float64)


class HashedEmbedder:
    """Feature-hashed bag of words: lowercase, split on non-alphanumerics,
    signed-hash each token into ``dim`` buckets, L2-normalize.

    The hash is keyed BLAKE2b, so vectors are identical across platforms and
    processes for a given (dim, seed).
    """

    def __init__(self, dim: int = 64, seed: int = 42):
        if dim < 1:
            raise ValueError("dim must be >= 1")
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)

    def _token_slot(self, token: str) -> tuple[int, float]:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8,
                                 key=self._key).digest()
        value = int.from_bytes(digest, "little")
        sign = 1.0 if (value >> 63) & 1 == 0 else -1.0
        return value % self.dim, sign

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for row, text in enumerate(texts):
            token = []
            for ch in text.lower():
                if ch.isalnum():
                    token.append(ch)
                elif token:
                    slot, sign = self._token_slot("".join(token))
                    out[row, slot] += sign
                    token = []
            if token:
                slot, sign = self._token_slot("".join(token))
                out[row, slot] += sign
            norm = float(np.linalg.norm(out[row]))
            if norm > 0.0:
                out[row] /= norm
        return out

    def fingerprint(self) -> str:
        return f"hashed:dim={self.dim}:seed={self.seed}"


class RemoteEmbedder:
    """JSON-over-HTTP embeddings client: POST {model, input} -> {data:
    [{embedding}, ...]} in input order. Retries once with backoff."""

    def __init__(self, endpoint: str, model: str, dim: int,
                 batch_size: int = 32, timeout_s: float = 60.0,
                 max_retries: int = 1):
        self.endpoint = endpoint
        self.model = model
        self.dim = dim
        self.batch_size = batch_size
        self.timeout_s = timeout_s
        self.max_retries = max_retries

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(EMBED_API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post_batch(self, batch: Sequence[str]) -> list[list[float]]:
        import httpx

        payload = {"model": self.model, "input": list(batch)}
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = httpx.post(self.endpoint, json=payload,
                                  headers=self._headers(), timeout=self.timeout_s)
                resp.raise_for_status()
                data = resp.json()["data"]
                return [item["embedding"] for item in data]
            except Exception as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(0.5 * 2 ** attempt)
        raise EmbeddingError(f"embedding backend failure: {last_exc}") from last_exc

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        rows: list[list[float]] = []
        for i in range(0, len(texts), self.batch_size):
            rows.extend(self._post_batch(texts[i:i + self.batch_size]))
        out = np.asarray(rows, dtype=np.float64)
        if out.shape != (len(texts), self.dim):
            raise EmbeddingError(
                f"backend returned shape {out.shape}, expected ({len(texts)}, {self.dim})"
            )
        return out

    def fingerprint(self) -> str:
        return f"remote:{self.model}:dim={self.dim}"


def build_embedder(cfg: EmbedderConfig) -> Embedder:
    if cfg.kind == "hashed":
        return HashedEmbedder(dim=cfg.dim, seed=cfg.seed)
    if cfg.kind == "remote":
        if not cfg.endpoint or not cfg.model:
            raise EmbeddingError("remote embedder requires endpoint and model")
        return RemoteEmbedder(cfg.endpoint, cfg.model, cfg.dim,
                              batch_size=cfg.batch_size)
    raise EmbeddingError(f"unknown embedder kind {cfg.kind!r}")


def embed_text(texts: Sequence[str], embedder: Embedder) -> np.ndarray:
    """Embed a batch of non-empty strings, order preserved."""
    if any(not t for t in texts):
        raise ValueError("embed_text requires non-empty strings")
    out = embedder.embed(texts)
    if not np.all(np.isfinite(out)):
        raise EmbeddingError("embedder produced non-finite values")
    return out


def embed_path(path: SemanticPath, embedder: Embedder,
               mode: str = MEAN_TAGS) -> np.ndarray:
    """Embed a semantic path into one vector.

    mean_tags: arithmetic mean of per-tag embeddings, L2-normalized; order
    of tags does not matter, and a query matching any one tag pulls the
    whole path closer. joined_string: embed the display string.
    """
    tags = path.tags()
    if not tags:
        raise ValueError("cannot embed an empty path")
    if mode == JOINED_STRING:
        return l2_normalize(embedder.embed([path.display()])[0])
    if mode != MEAN_TAGS:
        raise ValueError(f"unknown path embedding mode {mode!r}")
    vectors = embedder.embed(list(tags))
    return l2_normalize(vectors.mean(axis=0))


def similarity(a: np.ndarray, b: np.ndarray, metric: str = "cosine") -> float:
    """L2 distance (smaller is closer) or cosine similarity in [-1, 1]."""
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if metric == "l2":
        return float(np.linalg.norm(a - b))
    if metric == "cosine":
        na = float(np.linalg.norm(a))
        nb = float(np.linalg.norm(b))
        if na == 0.0 or nb == 0.0:
            return 0.0
        return float(np.clip(np.dot(a, b) / (na * nb), -1.0, 1.0))
    raise ValueError(f"unknown metric {metric!r}")
