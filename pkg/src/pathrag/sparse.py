"""Okapi BM25 inverted index with incremental upserts and removals.

Tokenization is lowercase alphanumeric runs, no stemming and no stopword
filtering (idf already damps function words). Scores use k1=1.2, b=0.75 and
the non-negative idf variant log(1 + (N - df + 0.5) / (df + 0.5)); duplicate
query terms are counted once.
"""

from __future__ import annotations

import math
import re
from collections import Counter

_TOKEN_RE = re.compile(r"[a-z0-9]+")

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class SparseIndex:
    def __init__(self, k1: float = DEFAULT_K1, b: float = DEFAULT_B):
        self.k1 = k1
        self.b = b
        self._postings: dict[str, dict[str, int]] = {}
        self._doc_terms: dict[str, Counter] = {}
        self._doc_len: dict[str, int] = {}
        self._total_len = 0

    def __len__(self) -> int:
        return len(self._doc_len)

    def __contains__(self, chunk_id: str) -> bool:
        return chunk_id in self._doc_len

    def ids(self) -> list[str]:
        return sorted(self._doc_len)

    @property
    def avgdl(self) -> float:
        n = len(self._doc_len)
        return self._total_len / n if n else 0.0

    def stats(self) -> tuple[int, float]:
        """(N, avgdl) as maintained incrementally."""
        return len(self._doc_len), self.avgdl

    def recompute_stats(self) -> tuple[int, float]:
        """(N, avgdl) rebuilt from the postings lists, for consistency
        checks. Chunks whose text tokenized to nothing contribute length 0
        and are tracked via the doc-length table."""
        lengths = {cid: 0 for cid in self._doc_len}
        for postings in self._postings.values():
            for cid, tf in postings.items():
                lengths[cid] += tf
        n = len(lengths)
        return n, (sum(lengths.values()) / n if n else 0.0)

    def upsert(self, chunk_id: str, text: str) -> None:
        self.install(chunk_id, Counter(tokenize(text)))

    def install(self, chunk_id: str, counts: Counter) -> None:
        """Register a chunk from pre-tokenized term counts (index loading)."""
        if chunk_id in self._doc_len:
            self.remove(chunk_id)
        counts = Counter(counts)
        length = sum(counts.values())
        self._doc_terms[chunk_id] = counts
        self._doc_len[chunk_id] = length
        self._total_len += length
        for term, tf in counts.items():
            self._postings.setdefault(term, {})[chunk_id] = tf

    def remove(self, chunk_id: str) -> None:
        counts = self._doc_terms.pop(chunk_id)
        self._total_len -= self._doc_len.pop(chunk_id)
        for term in counts:
            postings = self._postings[term]
            del postings[chunk_id]
            if not postings:
                del self._postings[term]

    def term_frequency(self, term: str, chunk_id: str) -> int:
        return self._postings.get(term, {}).get(chunk_id, 0)

    def postings(self, term: str) -> list[tuple[str, int]]:
        return sorted(self._postings.get(term, {}).items())

    def terms(self) -> list[str]:
        return sorted(self._postings)

    def idf(self, term: str) -> float:
        df = len(self._postings.get(term, ()))
        if df == 0:
            return 0.0
        n = len(self._doc_len)
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def search(self, query_text: str, n: int) -> list[tuple[str, float]]:
        """Top-n chunks by BM25 score, zero-score chunks excluded, ties
        broken by chunk_id ascending."""
        if n < 1:
            raise ValueError("n must be >= 1")
        terms = sorted(set(tokenize(query_text)))
        if not terms or not self._doc_len:
            return []
        avgdl = self.avgdl
        scores: dict[str, float] = {}
        for term in terms:
            postings = self._postings.get(term)
            if not postings:
                continue
            idf = self.idf(term)
            for chunk_id, tf in postings.items():
                dl = self._doc_len[chunk_id]
                denom = tf + self.k1 * (1.0 - self.b + self.b * dl / avgdl)
                scores[chunk_id] = scores.get(chunk_id, 0.0) + idf * tf * (self.k1 + 1.0) / denom
        ranked = sorted(
            ((cid, s) for cid, s in scores.items() if s > 0.0),
            key=lambda pair: (-pair[1], pair[0]),
        )
        return ranked[:n]
