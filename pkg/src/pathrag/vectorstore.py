"""In-memory vector store with exact and approximate search.

At or below ``ann_threshold`` live vectors, searches are exact brute-force
scans (the test oracle). Above it, a small HNSW-style layered graph answers
queries approximately; the graph is built lazily and updated incrementally.
Removals tombstone rows; the store compacts when dead rows outnumber live
ones.
"""

from __future__ import annotations

import math
import random
from typing import Callable

import numpy as np

from .embedding import EmbeddingError


class VectorStore:
    """Maps string ids to fixed-dimension float64 vectors.

    Search returns (id, score) pairs ordered closest-first: ascending L2
    distance or descending cosine similarity, ties broken by id.
    """

    def __init__(self, dim: int, metric: str = "l2",
                 ann_threshold: int = 100_000, ann_m: int = 16,
                 ann_ef_construction: int = 100, ann_ef_search: int = 64,
                 ann_seed: int = 42):
        if metric not in ("l2", "cosine"):
            raise ValueError(f"unknown metric {metric!r}")
        self.dim = dim
        self.metric = metric
        self.ann_threshold = ann_threshold
        self.ann_m = ann_m
        self.ann_ef_construction = ann_ef_construction
        self.ann_ef_search = ann_ef_search
        self.ann_seed = ann_seed
        self._matrix = np.zeros((0, dim), dtype=np.float64)
        self._rows = 0  # rows in use, including tombstones
        self._ids: list[str | None] = []
        self._id_row: dict[str, int] = {}
        self._graph: _HnswGraph | None = None

    def __len__(self) -> int:
        return len(self._id_row)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._id_row

    def ids(self) -> list[str]:
        return sorted(self._id_row)

    def get(self, chunk_id: str) -> np.ndarray:
        row = self._id_row[chunk_id]
        return self._matrix[row].copy()

    def _check(self, vec: np.ndarray) -> np.ndarray:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != (self.dim,):
            raise EmbeddingError(
                f"vector has shape {vec.shape}, store dim is {self.dim}")
        if not np.all(np.isfinite(vec)):
            raise EmbeddingError("vector has non-finite entries")
        return vec

    def _append_row(self, chunk_id: str, vec: np.ndarray) -> int:
        if self._rows == self._matrix.shape[0]:
            grown = np.zeros((max(8, self._matrix.shape[0] * 2), self.dim))
            grown[:self._rows] = self._matrix[:self._rows]
            self._matrix = grown
        row = self._rows
        self._matrix[row] = vec
        self._ids.append(chunk_id)
        self._rows += 1
        return row

    def upsert(self, chunk_id: str, vec: np.ndarray) -> None:
        vec = self._check(vec)
        old = self._id_row.pop(chunk_id, None)
        if old is not None:
            self._ids[old] = None
            if self._graph is not None:
                self._graph.deleted.add(old)
        row = self._append_row(chunk_id, vec)
        self._id_row[chunk_id] = row
        if self._graph is not None:
            self._graph.insert(row)
        self._maybe_compact()

    def remove(self, chunk_id: str) -> None:
        row = self._id_row.pop(chunk_id)
        self._ids[row] = None
        if self._graph is not None:
            self._graph.deleted.add(row)
        self._maybe_compact()

    def _maybe_compact(self) -> None:
        dead = self._rows - len(self._id_row)
        if dead > max(64, len(self._id_row)):
            self._compact()

    def _compact(self) -> None:
        live = [(cid, self._matrix[row]) for cid, row in
                sorted(self._id_row.items())]
        self._matrix = np.zeros((max(8, len(live)), self.dim), dtype=np.float64)
        self._ids = []
        self._id_row = {}
        self._rows = 0
        rebuild_graph = self._graph is not None
        self._graph = None
        for cid, vec in live:
            row = self._append_row(cid, vec)
            self._id_row[cid] = row
        if rebuild_graph and len(self) > self.ann_threshold:
            self._build_graph()

    # -- search -------------------------------------------------------------

    def _scores_for(self, qvec: np.ndarray, rows: np.ndarray) -> np.ndarray:
        block = self._matrix[rows]
        if self.metric == "l2":
            diff = block - qvec
            return np.sqrt(np.einsum("ij,ij->i", diff, diff))
        norms = np.linalg.norm(block, axis=1)
        qnorm = float(np.linalg.norm(qvec))
        sims = np.zeros(len(rows))
        if qnorm > 0.0:
            nz = norms > 0.0
            sims[nz] = (block[nz] @ qvec) / (norms[nz] * qnorm)
        return sims

    def _query_distance(self, qvec: np.ndarray, row: int) -> float:
        if self.metric == "l2":
            return float(np.linalg.norm(self._matrix[row] - qvec))
        return 1.0 - float(self._scores_for(qvec, np.array([row]))[0])

    def search(self, qvec: np.ndarray, n: int) -> list[tuple[str, float]]:
        if n < 1:
            raise ValueError("n must be >= 1")
        qvec = self._check(qvec)
        if not self._id_row:
            return []
        if len(self._id_row) <= self.ann_threshold:
            return self._search_exact(qvec, n)
        return self._search_ann(qvec, n)

    def _search_exact(self, qvec: np.ndarray, n: int) -> list[tuple[str, float]]:
        rows = np.fromiter(self._id_row.values(), dtype=np.int64,
                           count=len(self._id_row))
        scores = self._scores_for(qvec, rows)
        ids = list(self._id_row.keys())
        if self.metric == "l2":
            order = sorted(range(len(ids)), key=lambda i: (scores[i], ids[i]))
        else:
            order = sorted(range(len(ids)), key=lambda i: (-scores[i], ids[i]))
        return [(ids[i], float(scores[i])) for i in order[:n]]

    def _build_graph(self) -> None:
        graph = _HnswGraph(self, m=self.ann_m,
                           ef_construction=self.ann_ef_construction,
                           seed=self.ann_seed)
        for cid in sorted(self._id_row):
            graph.insert(self._id_row[cid])
        self._graph = graph

    def _search_ann(self, qvec: np.ndarray, n: int) -> list[tuple[str, float]]:
        if self._graph is None:
            self._build_graph()
        assert self._graph is not None
        ef = max(self.ann_ef_search, n)
        rows = self._graph.search(lambda row: self._query_distance(qvec, row), n, ef)
        hits = [(self._ids[row], float(self._scores_for(qvec, np.array([row]))[0]))
                for row in rows if self._ids[row] is not None]
        if self.metric == "l2":
            hits.sort(key=lambda h: (h[1], h[0]))
        else:
            hits.sort(key=lambda h: (-h[1], h[0]))
        return hits[:n]


class _HnswGraph:
    """Layered proximity graph (HNSW). Tombstoned rows stay traversable but
    are dropped from results; the owning store rebuilds on compaction."""

    def __init__(self, store: VectorStore, m: int = 16,
                 ef_construction: int = 100, seed: int = 42):
        self.store = store
        self.m = m
        self.m0 = 2 * m
        self.ef_construction = ef_construction
        self.level_mult = 1.0 / math.log(m)
        self.rng = random.Random(seed)
        self.entry: int | None = None
        self.max_level = -1
        self.neighbors: dict[int, list[list[int]]] = {}
        self.deleted: set[int] = set()

    def _row_distance(self, a: int, b: int) -> float:
        va = self.store._matrix[a]
        vb = self.store._matrix[b]
        if self.store.metric == "l2":
            return float(np.linalg.norm(va - vb))
        na = float(np.linalg.norm(va))
        nb = float(np.linalg.norm(vb))
        if na == 0.0 or nb == 0.0:
            return 1.0
        return 1.0 - float(np.dot(va, vb) / (na * nb))

    def insert(self, row: int) -> None:
        level = int(-math.log(self.rng.random()) * self.level_mult)
        self.neighbors[row] = [[] for _ in range(level + 1)]
        if self.entry is None:
            self.entry = row
            self.max_level = level
            return
        dist = lambda other: self._row_distance(row, other)
        ep = self.entry
        for lc in range(self.max_level, level, -1):
            ep = self._greedy_descend(dist, ep, lc)
        for lc in range(min(level, self.max_level), -1, -1):
            found = self._search_layer(dist, [ep], self.ef_construction, lc)
            cap = self.m0 if lc == 0 else self.m
            selected = found[:cap]
            self.neighbors[row][lc] = [r for _, r in selected]
            for d, other in selected:
                links = self.neighbors[other][lc]
                links.append(row)
                if len(links) > cap:
                    links.sort(key=lambda r: (self._row_distance(other, r), r))
                    del links[cap:]
            if selected:
                ep = selected[0][1]
        if level > self.max_level:
            self.max_level = level
            self.entry = row

    def _greedy_descend(self, dist: Callable[[int], float], ep: int,
                        level: int) -> int:
        best = ep
        best_d = dist(ep)
        improved = True
        while improved:
            improved = False
            for other in self.neighbors[best][level]:
                d = dist(other)
                if d < best_d:
                    best, best_d = other, d
                    improved = True
        return best

    def _search_layer(self, dist: Callable[[int], float], entries: list[int],
                      ef: int, level: int) -> list[tuple[float, int]]:
        import heapq

        visited = set(entries)
        candidates = [(dist(r), r) for r in entries]
        heapq.heapify(candidates)
        best = sorted(candidates)
        while candidates:
            d, row = heapq.heappop(candidates)
            if best and d > best[-1][0] and len(best) >= ef:
                break
            for other in self.neighbors[row][level] if level < len(self.neighbors[row]) else []:
                if other in visited:
                    continue
                visited.add(other)
                od = dist(other)
                if len(best) < ef or od < best[-1][0]:
                    heapq.heappush(candidates, (od, other))
                    best.append((od, other))
                    best.sort()
                    if len(best) > ef:
                        best.pop()
        return best

    def search(self, dist: Callable[[int], float], n: int, ef: int) -> list[int]:
        if self.entry is None:
            return []
        ep = self.entry
        for lc in range(self.max_level, 0, -1):
            ep = self._greedy_descend(dist, ep, lc)
        found = self._search_layer(dist, [ep], max(ef, n), 0)
        return [r for _, r in found if r not in self.deleted]
