"""Online retrieval: query rewriting, coarse retrieval, weighted rank
fusion, and context pruning, executed independently per sub-query.

Coarse retrieval is recall-oriented: the top 3k hits from the tag index plus
an auxiliary ceil(2k/5) hits from the sparse index form the candidate set.
Candidates are then re-ranked by a weighted reciprocal-rank fusion over
three rank signals (tag, semantic, sparse) and pruned chunk by chunk with
the path as a context anchor. Rewriter and pruner failures degrade (original
query, passthrough) rather than abort; only index or embedder failures
propagate.
"""

from __future__ import annotations

import json
import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import RetrievalConfig
from .embedding import Embedder, embed_text, similarity
from .generation import (CompletionClient, CompletionUnavailable,
                         PromptTemplates, load_templates)
from .index import AugmentedChunk, HybridIndex

logger = logging.getLogger(__name__)

SUBQUERY_WORD_LIMIT = 12

TAG = "tag"
SEMANTIC = "semantic"
SPARSE = "sparse"


@dataclass
class Candidate:
    """One coarse-retrieval hit with its per-source ranks and scores."""

    chunk: AugmentedChunk
    tag_rank: int | None = None
    tag_score: float | None = None
    sparse_rank: int | None = None
    sparse_score: float | None = None
    semantic_rank: int | None = None
    semantic_score: float | None = None
    fused_score: float | None = None

    @property
    def chunk_id(self) -> str:
        return self.chunk.chunk_id

    def sources_ranked(self) -> int:
        return sum(rank is not None for rank in
                   (self.tag_rank, self.semantic_rank, self.sparse_rank))


@dataclass(frozen=True)
class PrunedEvidence:
    chunk_id: str
    text: str
    path_display: str


@dataclass
class SubQueryContext:
    """A sub-query with its candidates, fused top-k, and pruned evidence.

    The sub-query-to-evidence mapping is preserved end to end so the
    generator can group evidence under the question that retrieved it.
    """

    sub_query: str
    candidates: list[Candidate] = field(default_factory=list)
    fused: list[Candidate] = field(default_factory=list)
    pruned: list[PrunedEvidence] = field(default_factory=list)


_JSON_ARRAY_RE = re.compile(r"\[.*\]", re.DOTALL)


def _parse_subqueries(completion: str) -> list[str]:
    text = completion.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?|\n?```$", "", text).strip()
    m = _JSON_ARRAY_RE.search(text)
    if m is None:
        raise ValueError(f"no JSON array in rewriter output: {completion[:120]!r}")
    data = json.loads(m.group(0))
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise ValueError("rewriter output is not an array of strings")
    return data


def _truncate_words(text: str, limit: int = SUBQUERY_WORD_LIMIT) -> str:
    words = text.split()
    return " ".join(words[:limit])


def rewrite_query(query: str, config: RetrievalConfig,
                  client: CompletionClient,
                  templates: PromptTemplates | None = None,
                  domain: str = "general", history: str = "") -> list[str]:
    """Expand a query into sub-queries; the original always comes first.

    Sub-queries are truncated to 12 words and deduplicated
    case-insensitively; at most max_subqueries are kept after the original.
    With expansion disabled or the null backend, the result is just the
    original query. A rewriter failure (after one retry) degrades to the
    original query with a logged warning.
    """
    if not query:
        raise ValueError("query must be non-empty")
    if not config.expansion_enabled or client.kind == "null":
        return [query]
    templates = templates or load_templates()
    system, user = templates.rewrite.render(
        DOMAIN=domain, max_n=str(config.max_subqueries), q=query, hist=history)
    raw: list[str] | None = None
    for attempt in range(2):
        try:
            raw = _parse_subqueries(client.complete(system, user))
            break
        except CompletionUnavailable:
            return [query]
        except Exception as exc:
            if attempt == 1:
                logger.warning("query rewriting failed, using original query: %s", exc)
                return [query]
    assert raw is not None
    out = [query]
    seen = {query.casefold()}
    for candidate in raw:
        sub = _truncate_words(candidate.strip())
        if not sub:
            continue
        key = sub.casefold()
        if key in seen:
            continue
        seen.add(key)
        out.append(sub)
        if len(out) >= config.max_subqueries + 1:
            break
    return out


def coarse_retrieve(sub_query: str, index: HybridIndex, embedder: Embedder,
                    config: RetrievalConfig, k: int | None = None,
                    query_vec: np.ndarray | None = None) -> list[Candidate]:
    """Union of top-3k tag hits and top-ceil(2k/5) sparse hits.

    A chunk found by both sources appears once with both ranks recorded; the
    full augmented chunk travels with each candidate, so paths stay attached
    to content downstream.
    """
    k = k if k is not None else config.k
    if query_vec is None:
        query_vec = embed_text([sub_query], embedder)[0]
    tag_hits = index.search_tag(query_vec, config.tag_fanout(k))
    sparse_hits = index.search_sparse(sub_query, config.effective_sparse_fanout(k))
    by_id: dict[str, Candidate] = {}
    for hit in tag_hits:
        by_id[hit.chunk_id] = Candidate(chunk=index.get_chunk(hit.chunk_id),
                                        tag_rank=hit.rank, tag_score=hit.score)
    for hit in sparse_hits:
        cand = by_id.get(hit.chunk_id)
        if cand is None:
            cand = Candidate(chunk=index.get_chunk(hit.chunk_id))
            by_id[hit.chunk_id] = cand
        cand.sparse_rank = hit.rank
        cand.sparse_score = hit.score
    return list(by_id.values())


def rank_semantic(candidates: list[Candidate], query_vec: np.ndarray) -> None:
    """Assign semantic ranks 1..n over the candidate set by descending
    cosine similarity of the chunk-text vectors to the sub-query vector,
    ties broken by chunk_id."""
    if not candidates:
        return
    scored = []
    for cand in candidates:
        sim = similarity(cand.chunk.text_vector, query_vec, metric="cosine")
        scored.append((sim, cand))
    scored.sort(key=lambda pair: (-pair[0], pair[1].chunk_id))
    for rank, (sim, cand) in enumerate(scored, start=1):
        cand.semantic_rank = rank
        cand.semantic_score = sim


def rrf_fuse(candidates: list[Candidate], config: RetrievalConfig,
             k: int | None = None) -> list[Candidate]:
    """Weighted reciprocal-rank fusion: score = sum over ranked sources of
    weight / (eta + rank).

    A source the candidate is missing from contributes zero by default; the
    "worst_rank" policy instead charges weight / (eta + worst rank + 1).
    Ties break by more-sources-ranked, then chunk_id. Returns the top-k by
    descending fused score.
    """
    k = k if k is not None else config.k
    w_tag, w_sem, w_sparse = config.weights()
    worst = {
        TAG: max((c.tag_rank for c in candidates if c.tag_rank), default=0),
        SEMANTIC: max((c.semantic_rank for c in candidates if c.semantic_rank), default=0),
        SPARSE: max((c.sparse_rank for c in candidates if c.sparse_rank), default=0),
    }
    use_worst = config.missing_rank_policy == "worst_rank"
    for cand in candidates:
        score = 0.0
        for weight, rank, source in ((w_tag, cand.tag_rank, TAG),
                                     (w_sem, cand.semantic_rank, SEMANTIC),
                                     (w_sparse, cand.sparse_rank, SPARSE)):
            if rank is not None:
                score += weight / (config.eta + rank)
            elif use_worst and worst[source]:
                score += weight / (config.eta + worst[source] + 1)
        cand.fused_score = score
    ranked = sorted(candidates,
                    key=lambda c: (-c.fused_score, -c.sources_ranked(), c.chunk_id))
    return ranked[:k]


def prune_contexts(fused: list[Candidate], sub_query: str, original_query: str,
                   client: CompletionClient,
                   templates: PromptTemplates | None = None,
                   domain: str = "general", enabled: bool = True) -> list[PrunedEvidence]:
    """Filter each fused chunk against its sub-query, path prepended as the
    context anchor. An empty pruner output drops the chunk; a pruner failure
    passes the chunk through unpruned with a warning. Disabled pruning (or
    the null backend) is a passthrough."""
    passthrough = not enabled or client.kind == "null"
    templates = templates or load_templates()
    out: list[PrunedEvidence] = []
    for cand in fused:
        display = cand.chunk.path.display()
        if passthrough:
            out.append(PrunedEvidence(cand.chunk_id, cand.chunk.text, display))
            continue
        payload = f"[{display}]\n{cand.chunk.text}"
        system, user = templates.prune.render(
            DOMAIN=domain, sub_query=sub_query, q=original_query, text=payload)
        try:
            pruned = client.complete(system, user).strip()
        except Exception as exc:
            logger.warning("pruner failed for %s; passing chunk through: %s",
                           cand.chunk_id, exc)
            out.append(PrunedEvidence(cand.chunk_id, cand.chunk.text, display))
            continue
        if pruned:
            out.append(PrunedEvidence(cand.chunk_id, pruned, display))
    return out


def _process_subquery(sub_query: str, original_query: str, index: HybridIndex,
                      embedder: Embedder, client: CompletionClient,
                      config: RetrievalConfig, templates: PromptTemplates,
                      domain: str, k: int | None) -> SubQueryContext:
    query_vec = embed_text([sub_query], embedder)[0]
    candidates = coarse_retrieve(sub_query, index, embedder, config, k=k,
                                 query_vec=query_vec)
    rank_semantic(candidates, query_vec)
    fused = rrf_fuse(candidates, config, k=k)
    pruned = prune_contexts(fused, sub_query, original_query, client,
                            templates=templates, domain=domain,
                            enabled=config.pruning_enabled)
    return SubQueryContext(sub_query=sub_query, candidates=candidates,
                           fused=fused, pruned=pruned)


def retrieve(query: str, index: HybridIndex, embedder: Embedder,
             client: CompletionClient, config: RetrievalConfig,
             templates: PromptTemplates | None = None,
             domain: str = "general", k: int | None = None,
             history: str = "") -> list[SubQueryContext]:
    """Full online phase: rewrite, then per sub-query coarse retrieval,
    semantic ranking, fusion, and pruning. Results come back in sub-query
    order regardless of execution concurrency."""
    templates = templates or load_templates()
    subqueries = rewrite_query(query, config, client, templates=templates,
                               domain=domain, history=history)
    if config.concurrency > 1 and len(subqueries) > 1:
        with ThreadPoolExecutor(max_workers=config.concurrency) as pool:
            futures = [pool.submit(_process_subquery, sq, query, index, embedder,
                                   client, config, templates, domain, k)
                       for sq in subqueries]
            return [f.result() for f in futures]
    return [_process_subquery(sq, query, index, embedder, client, config,
                              templates, domain, k)
            for sq in subqueries]
