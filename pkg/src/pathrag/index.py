"""The hybrid index: three parallel sub-indices over one corpus.

* tag store: path vectors, L2 distance (structural signal)
* dense store: chunk-text vectors, cosine by default (semantic signal)
* sparse index: BM25 inverted index over chunk text (lexical signal)

All three always hold exactly the same chunk-id set. Mutations (upsert,
remove, tag injection) are serialized through a single writer lock and are
atomic per item; searches take no lock.
"""

from __future__ import annotations

import hashlib
import json
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import IndexConfig
from .corpus import Chunk
from .embedding import Embedder, EmbeddingError, embed_path
from .sparse import SparseIndex
from .tagging import SemanticPath, normalize_tag
from .vectorstore import VectorStore

FORMAT_VERSION = 1

DOCUMENT_SCOPE = "document"
CHUNK_SCOPE = "chunk"


class HybridIndexError(RuntimeError):
    pass


class UnknownDocumentError(HybridIndexError):
    def __init__(self, doc_id: str):
        super().__init__(f"unknown document: {doc_id}")
        self.doc_id = doc_id


class UnknownChunkError(HybridIndexError):
    def __init__(self, chunk_id: str):
        super().__init__(f"unknown chunk: {chunk_id}")
        self.chunk_id = chunk_id


class IndexFormatError(HybridIndexError):
    pass


class FingerprintMismatchError(HybridIndexError):
    pass


class CorruptIndexError(HybridIndexError):
    pass


@dataclass
class AugmentedChunk:
    """A chunk paired with its semantic path and both vectors."""

    chunk: Chunk
    path: SemanticPath
    text_vector: np.ndarray
    path_vector: np.ndarray

    @property
    def chunk_id(self) -> str:
        return self.chunk.chunk_id

    @property
    def text(self) -> str:
        return self.chunk.text


@dataclass(frozen=True)
class RankedHit:
    chunk_id: str
    score: float
    rank: int
    source: str  # tag | dense | sparse


@dataclass(frozen=True)
class PathVectorChange:
    chunk_id: str
    old_vector: np.ndarray
    new_vector: np.ndarray


@dataclass
class TagEditReport:
    target: str
    scope: str
    tag: str
    action: str
    noop: bool
    affected: list[PathVectorChange] = field(default_factory=list)

    @property
    def affected_chunk_ids(self) -> list[str]:
        return [c.chunk_id for c in self.affected]


class HybridIndex:
    def __init__(self, embedder: Embedder, config: IndexConfig | None = None,
                 path_embedding: str = "mean_tags"):
        config = config or IndexConfig()
        self.config = config
        self.embedder = embedder
        self.path_embedding = path_embedding
        ann = dict(ann_threshold=config.ann_threshold, ann_m=config.ann_m,
                   ann_ef_construction=config.ann_ef_construction,
                   ann_ef_search=config.ann_ef_search, ann_seed=config.ann_seed)
        self.tag_store = VectorStore(embedder.dim, metric=config.tag_metric, **ann)
        self.dense_store = VectorStore(embedder.dim, metric=config.dense_metric, **ann)
        self.sparse = SparseIndex()
        self._chunks: dict[str, AugmentedChunk] = {}
        self._doc_registry: dict[str, list[str]] = {}
        self._edit_log: list[dict] = []
        self._write_lock = threading.RLock()

    def __len__(self) -> int:
        return len(self._chunks)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._chunks

    def chunk_ids(self) -> list[str]:
        return sorted(self._chunks)

    def doc_ids(self) -> list[str]:
        return sorted(self._doc_registry)

    def has_document(self, doc_id: str) -> bool:
        return doc_id in self._doc_registry

    def get_chunk(self, chunk_id: str) -> AugmentedChunk:
        try:
            return self._chunks[chunk_id]
        except KeyError:
            raise UnknownChunkError(chunk_id) from None

    def chunks_of(self, doc_id: str) -> list[AugmentedChunk]:
        if doc_id not in self._doc_registry:
            raise UnknownDocumentError(doc_id)
        return [self._chunks[cid] for cid in self._doc_registry[doc_id]]

    def stats(self) -> dict:
        n, avgdl = self.sparse.stats()
        return {
            "chunk_count": len(self._chunks),
            "doc_count": len(self._doc_registry),
            "sparse_n": n,
            "avg_chunk_tokens": avgdl,
        }

    @property
    def edit_log(self) -> list[dict]:
        return list(self._edit_log)

    # -- mutations ------------------------------------------------------------

    def _validate_item(self, item: AugmentedChunk) -> None:
        for vec, name in ((item.text_vector, "text"), (item.path_vector, "path")):
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (self.embedder.dim,):
                raise EmbeddingError(
                    f"{name} vector of {item.chunk_id} has shape {arr.shape}, "
                    f"index dim is {self.embedder.dim}")
            if not np.all(np.isfinite(arr)):
                raise EmbeddingError(f"{name} vector of {item.chunk_id} is non-finite")

    def upsert_chunks(self, items: list[AugmentedChunk]) -> None:
        """Insert or replace chunks in all three sub-indices.

        Atomic per item: each item is fully validated before any sub-index is
        touched, so a failing item leaves the index unchanged for that item
        (earlier items in the batch stay applied).
        """
        with self._write_lock:
            for item in items:
                self._validate_item(item)
                cid = item.chunk_id
                doc_id = item.chunk.doc_id
                self.tag_store.upsert(cid, item.path_vector)
                self.dense_store.upsert(cid, item.text_vector)
                self.sparse.upsert(cid, item.chunk.text)
                self._chunks[cid] = item
                siblings = self._doc_registry.setdefault(doc_id, [])
                if cid not in siblings:
                    siblings.append(cid)
                    siblings.sort(key=lambda c: self._chunks[c].chunk.ordinal)

    def remove_document(self, doc_id: str) -> list[str]:
        """Remove every chunk of a document from all three sub-indices."""
        with self._write_lock:
            if doc_id not in self._doc_registry:
                raise UnknownDocumentError(doc_id)
            removed = self._doc_registry.pop(doc_id)
            for cid in removed:
                self.tag_store.remove(cid)
                self.dense_store.remove(cid)
                self.sparse.remove(cid)
                del self._chunks[cid]
            return removed

    # -- search ---------------------------------------------------------------

    @staticmethod
    def _to_hits(pairs: list[tuple[str, float]], source: str) -> list[RankedHit]:
        return [RankedHit(chunk_id=cid, score=score, rank=i + 1, source=source)
                for i, (cid, score) in enumerate(pairs)]

    def search_tag(self, query_vec: np.ndarray, n: int) -> list[RankedHit]:
        return self._to_hits(self.tag_store.search(query_vec, n), "tag")

    def search_dense(self, query_vec: np.ndarray, n: int) -> list[RankedHit]:
        return self._to_hits(self.dense_store.search(query_vec, n), "dense")

    def search_sparse(self, query_text: str, n: int) -> list[RankedHit]:
        return self._to_hits(self.sparse.search(query_text, n), "sparse")

    # -- tag curation -----------------------------------------------------------

    def _resolve_target(self, target: str, scope: str) -> list[str]:
        if scope == DOCUMENT_SCOPE:
            if target not in self._doc_registry:
                raise UnknownDocumentError(target)
            return list(self._doc_registry[target])
        if scope == CHUNK_SCOPE:
            if target not in self._chunks:
                raise UnknownChunkError(target)
            return [target]
        raise ValueError(f"unknown scope {scope!r}")

    def log_event(self, action: str, actor: str = "local", **details: object) -> None:
        """Append one audit record (who/when/what) to the edit log."""
        with self._write_lock:
            self._edit_log.append({
                "ts": datetime.now(timezone.utc).isoformat(),
                "actor": actor,
                "action": action,
                **details,
            })

    def _log_edit(self, action: str, target: str, scope: str, tag: str,
                  affected: list[str], noop: bool, actor: str) -> None:
        self.log_event(action, actor=actor, scope=scope, target=target,
                       tag=tag, affected_chunk_ids=affected, noop=noop)

    def _apply_path_edit(self, cid: str, new_path: SemanticPath) -> PathVectorChange:
        item = self._chunks[cid]
        old_vec = item.path_vector.copy()
        new_vec = embed_path(new_path, self.embedder, self.path_embedding)
        item.path = new_path
        item.path_vector = new_vec
        self.tag_store.upsert(cid, new_vec)
        return PathVectorChange(cid, old_vec, new_vec)

    def inject_tag(self, target: str, tag: str, scope: str = DOCUMENT_SCOPE,
                   actor: str = "local") -> TagEditReport:
        """Append a tag to the targeted paths and re-embed them in place.

        Document scope extends the master segment of every chunk of the
        document; chunk scope extends that chunk's paragraph segment.
        Injecting an already-present tag is a no-op (reported as such); only
        the targeted chunks' path vectors change.
        """
        norm = normalize_tag(tag)
        if norm is None:
            raise ValueError(f"tag normalizes to empty: {tag!r}")
        with self._write_lock:
            chunk_ids = self._resolve_target(target, scope)
            affected: list[PathVectorChange] = []
            for cid in chunk_ids:
                path = self._chunks[cid].path
                if path.has_tag(norm):
                    continue
                if scope == DOCUMENT_SCOPE:
                    new_path = SemanticPath(path.master + (norm,), path.paragraph)
                else:
                    new_path = SemanticPath(path.master, path.paragraph + (norm,))
                affected.append(self._apply_path_edit(cid, new_path))
            noop = not affected
            self._log_edit("inject", target, scope, norm,
                           [c.chunk_id for c in affected], noop, actor)
            return TagEditReport(target=target, scope=scope, tag=norm,
                                 action="inject", noop=noop, affected=affected)

    def remove_tag(self, target: str, tag: str, scope: str = DOCUMENT_SCOPE,
                   actor: str = "local") -> TagEditReport:
        """Remove a tag from the targeted paths (inverse of inject_tag).

        Removing a tag that is not present is a no-op report. Removing the
        last master tag of a chunk is refused: paths keep a non-empty master
        segment.
        """
        norm = normalize_tag(tag)
        if norm is None:
            raise ValueError(f"tag normalizes to empty: {tag!r}")
        key = norm.casefold()
        with self._write_lock:
            chunk_ids = self._resolve_target(target, scope)
            affected: list[PathVectorChange] = []
            for cid in chunk_ids:
                path = self._chunks[cid].path
                if not path.has_tag(norm):
                    continue
                master = tuple(t for t in path.master if t.casefold() != key)
                paragraph = tuple(t for t in path.paragraph if t.casefold() != key)
                if not master:
                    raise ValueError(
                        f"removing {norm!r} would leave {cid} without master tags")
                affected.append(self._apply_path_edit(cid, SemanticPath(master, paragraph)))
            noop = not affected
            self._log_edit("remove", target, scope, norm,
                           [c.chunk_id for c in affected], noop, actor)
            return TagEditReport(target=target, scope=scope, tag=norm,
                                 action="remove", noop=noop, affected=affected)

    def probe(self, query_vec: np.ndarray, target: str,
              scope: str = DOCUMENT_SCOPE) -> dict:
        """Distance and rank of a target for a probe query over the tag
        index: the best-ranked chunk of a document, or the chunk itself."""
        wanted = set(self._resolve_target(target, scope))
        hits = self.search_tag(query_vec, max(len(self._chunks), 1))
        for hit in hits:
            if hit.chunk_id in wanted:
                return {"chunk_id": hit.chunk_id, "distance": hit.score,
                        "rank": hit.rank}
        raise HybridIndexError(f"target {target} not reachable by probe")

    # -- persistence ------------------------------------------------------------

    def persist(self, path: str | Path) -> None:
        """Write the index as a self-describing directory.

        Files: header (JSON: version, dims, metrics, embedder fingerprint,
        counts, per-file checksums), chunks (JSONL), vectors.tag and
        vectors.dense (little-endian float64 records in chunk order),
        postings (JSONL, term -> sorted (row, tf) pairs), editlog (JSONL).
        """
        root = Path(path)
        root.mkdir(parents=True, exist_ok=True)
        order = self.chunk_ids()
        row_of = {cid: i for i, cid in enumerate(order)}

        chunk_lines = []
        for cid in order:
            item = self._chunks[cid]
            chunk_lines.append(json.dumps({
                "chunk_id": cid,
                "doc_id": item.chunk.doc_id,
                "ordinal": item.chunk.ordinal,
                "start": item.chunk.char_span[0],
                "end": item.chunk.char_span[1],
                "text": item.chunk.text,
                "master": list(item.path.master),
                "paragraph": list(item.path.paragraph),
            }, sort_keys=True, ensure_ascii=False))
        files: dict[str, bytes] = {
            "chunks": ("\n".join(chunk_lines) + "\n" if chunk_lines else "").encode("utf-8"),
        }

        tag_rows = np.zeros((len(order), self.embedder.dim), dtype="<f8")
        dense_rows = np.zeros((len(order), self.embedder.dim), dtype="<f8")
        for cid, row in row_of.items():
            tag_rows[row] = self._chunks[cid].path_vector
            dense_rows[row] = self._chunks[cid].text_vector
        files["vectors.tag"] = tag_rows.tobytes()
        files["vectors.dense"] = dense_rows.tobytes()

        posting_lines = []
        for term in self.sparse.terms():
            pairs = sorted((row_of[cid], tf) for cid, tf in self.sparse.postings(term))
            posting_lines.append(json.dumps(
                {"term": term, "postings": pairs}, sort_keys=True, ensure_ascii=False))
        files["postings"] = ("\n".join(posting_lines) + "\n" if posting_lines else "").encode("utf-8")

        log_lines = [json.dumps(rec, sort_keys=True, ensure_ascii=False)
                     for rec in self._edit_log]
        files["editlog"] = ("\n".join(log_lines) + "\n" if log_lines else "").encode("utf-8")

        header = {
            "format_version": FORMAT_VERSION,
            "dim": self.embedder.dim,
            "tag_metric": self.config.tag_metric,
            "dense_metric": self.config.dense_metric,
            "path_embedding": self.path_embedding,
            "embedder_fingerprint": self.embedder.fingerprint(),
            "chunk_count": len(order),
            "doc_count": len(self._doc_registry),
            "checksums": {name: hashlib.sha256(blob).hexdigest()
                          for name, blob in files.items()},
        }
        for name, blob in files.items():
            (root / name).write_bytes(blob)
        (root / "header").write_text(
            json.dumps(header, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, embedder: Embedder,
             config: IndexConfig | None = None) -> "HybridIndex":
        """Load a persisted index, refusing on version, fingerprint, or
        checksum mismatches."""
        root = Path(path)
        header_path = root / "header"
        if not header_path.exists():
            raise IndexFormatError(f"no index header at {root}")
        header = json.loads(header_path.read_text(encoding="utf-8"))
        version = header.get("format_version")
        if version != FORMAT_VERSION:
            raise IndexFormatError(
                f"format version {version} not supported (expected {FORMAT_VERSION})")
        fingerprint = embedder.fingerprint()
        if header.get("embedder_fingerprint") != fingerprint:
            raise FingerprintMismatchError(
                f"index was built with embedder {header.get('embedder_fingerprint')!r}, "
                f"got {fingerprint!r}")
        blobs: dict[str, bytes] = {}
        for name, expected in header["checksums"].items():
            fp = root / name
            if not fp.exists():
                raise CorruptIndexError(f"missing index file {name}")
            blob = fp.read_bytes()
            actual = hashlib.sha256(blob).hexdigest()
            if actual != expected:
                raise CorruptIndexError(f"checksum mismatch for {name}")
            blobs[name] = blob

        index = cls(embedder, config,
                    path_embedding=header.get("path_embedding", "mean_tags"))
        index.config.tag_metric = header["tag_metric"]
        index.config.dense_metric = header["dense_metric"]
        index.tag_store.metric = header["tag_metric"]
        index.dense_store.metric = header["dense_metric"]

        records = [json.loads(line) for line in
                   blobs["chunks"].decode("utf-8").splitlines() if line]
        dim = header["dim"]
        if dim != embedder.dim:
            raise FingerprintMismatchError(
                f"index dim {dim} does not match embedder dim {embedder.dim}")
        tag_rows = np.frombuffer(blobs["vectors.tag"], dtype="<f8").reshape(-1, dim)
        dense_rows = np.frombuffer(blobs["vectors.dense"], dtype="<f8").reshape(-1, dim)
        if tag_rows.shape[0] != len(records) or dense_rows.shape[0] != len(records):
            raise CorruptIndexError("vector file row count does not match chunks")

        with index._write_lock:
            for row, rec in enumerate(records):
                chunk = Chunk(chunk_id=rec["chunk_id"], doc_id=rec["doc_id"],
                              ordinal=rec["ordinal"], text=rec["text"],
                              char_span=(rec["start"], rec["end"]))
                item = AugmentedChunk(
                    chunk=chunk,
                    path=SemanticPath(tuple(rec["master"]), tuple(rec["paragraph"])),
                    text_vector=dense_rows[row].copy(),
                    path_vector=tag_rows[row].copy(),
                )
                index._chunks[chunk.chunk_id] = item
                index.tag_store.upsert(chunk.chunk_id, item.path_vector)
                index.dense_store.upsert(chunk.chunk_id, item.text_vector)
                siblings = index._doc_registry.setdefault(chunk.doc_id, [])
                siblings.append(chunk.chunk_id)
            for doc_id in index._doc_registry:
                index._doc_registry[doc_id].sort(
                    key=lambda c: index._chunks[c].chunk.ordinal)

            order = [rec["chunk_id"] for rec in records]
            term_counts: dict[str, Counter] = {cid: Counter() for cid in order}
            for line in blobs["postings"].decode("utf-8").splitlines():
                if not line:
                    continue
                entry = json.loads(line)
                for row, tf in entry["postings"]:
                    term_counts[order[row]][entry["term"]] = tf
            for cid in order:
                index.sparse.install(cid, term_counts[cid])

            for line in blobs["editlog"].decode("utf-8").splitlines():
                if line:
                    index._edit_log.append(json.loads(line))
        return index


def observable_state(index: HybridIndex) -> dict:
    """Hashable summary of searchable state (paths, texts, vectors,
    postings) used by tests to compare indices byte-for-byte. The edit log
    is excluded: it is an audit trail, not searchable state."""
    state: dict = {}
    for cid in index.chunk_ids():
        item = index.get_chunk(cid)
        state[cid] = {
            "text": item.chunk.text,
            "master": list(item.path.master),
            "paragraph": list(item.path.paragraph),
            "text_vector": hashlib.sha256(
                np.ascontiguousarray(item.text_vector, dtype="<f8").tobytes()).hexdigest(),
            "path_vector": hashlib.sha256(
                np.ascontiguousarray(item.path_vector, dtype="<f8").tobytes()).hexdigest(),
        }
    postings = {term: index.sparse.postings(term) for term in index.sparse.terms()}
    return {"chunks": state, "postings": postings, "stats": index.stats()}
