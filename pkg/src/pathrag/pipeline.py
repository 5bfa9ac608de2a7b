"""End-to-end engine: offline ingestion and online querying.

Offline, documents are segmented, tagged (master + paragraph), embedded,
and upserted into the hybrid index — one document at a time, so new uploads
never trigger a global rebuild. Online, a query runs through rewriting,
per-sub-query retrieval, fusion, pruning, and optionally generation, with a
full debug trace for auditing.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Any

from .config import EngineConfig
from .corpus import Chunk, Document, load_corpus, segment_document
from .embedding import Embedder, build_embedder, embed_path, embed_text
from .generation import (Answer, CompletionClient, PromptTemplates,
                         build_completion_client, generate_answer,
                         load_templates)
from .index import AugmentedChunk, HybridIndex
from .retrieval import SubQueryContext, retrieve
from .tagging import (HeuristicTagger, LlmTagger, MasterTagCache, Tagger,
                      build_path, generate_master_tags,
                      generate_paragraph_tags, master_or_fallback)

logger = logging.getLogger(__name__)


class EmptyIndexError(RuntimeError):
    """Raised when a query arrives before any document was ingested."""


@dataclass
class DocumentIngestResult:
    doc_id: str
    chunk_ids: list[str]
    replaced: bool


@dataclass
class IngestReport:
    documents: list[DocumentIngestResult]
    seconds: float

    @property
    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self.documents]

    @property
    def chunk_count(self) -> int:
        return sum(len(d.chunk_ids) for d in self.documents)


@dataclass
class QueryDebugTrace:
    """Faithful record of one query's pipeline run.

    With deterministic backends, replaying the same request reproduces this
    trace byte for byte (see to_json).
    """

    query: str
    k: int
    subqueries: list[str]
    stages: list[dict]
    answer: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "query": self.query,
            "k": self.k,
            "subqueries": self.subqueries,
            "stages": self.stages,
            "answer": self.answer,
        }

    def to_json(self) -> str:
        import json

        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)


@dataclass
class QueryResult:
    contexts: list[SubQueryContext]
    answer: Answer | None = None
    trace: QueryDebugTrace | None = None


def _trace_stage(ctx: SubQueryContext) -> dict:
    candidates = []
    for cand in sorted(ctx.candidates, key=lambda c: c.chunk_id):
        candidates.append({
            "chunk_id": cand.chunk_id,
            "path": cand.chunk.path.display(),
            "tag_rank": cand.tag_rank,
            "tag_l2": cand.tag_score,
            "sparse_rank": cand.sparse_rank,
            "sparse_score": cand.sparse_score,
            "semantic_rank": cand.semantic_rank,
            "semantic_cosine": cand.semantic_score,
        })
    fused = [{
        "chunk_id": cand.chunk_id,
        "path": cand.chunk.path.display(),
        "score": cand.fused_score,
        "sources_ranked": cand.sources_ranked(),
    } for cand in ctx.fused]
    pruned = [{
        "chunk_id": p.chunk_id,
        "path": p.path_display,
        "text": p.text,
    } for p in ctx.pruned]
    return {"sub_query": ctx.sub_query, "candidates": candidates,
            "fused": fused, "pruned": pruned}


class Engine:
    """Owns the hybrid index plus the embedder, tagger, and LLM client.

    Components are built from config but can be injected for tests
    (scripted clients, prebuilt indices).
    """

    def __init__(self, config: EngineConfig | None = None,
                 embedder: Embedder | None = None,
                 llm: CompletionClient | None = None,
                 tagger: Tagger | None = None,
                 index: HybridIndex | None = None,
                 templates: PromptTemplates | None = None):
        self.config = config or EngineConfig()
        self.embedder = embedder or build_embedder(self.config.embedder)
        self.llm = llm or build_completion_client(self.config.llm)
        self.templates = templates or load_templates(self.config.prompt_dir)
        if tagger is not None:
            self.tagger = tagger
        elif self.config.tagger.kind == "llm":
            self.tagger = LlmTagger(self.llm, self.templates,
                                    domain=self.config.tagger.domain)
        else:
            self.tagger = HeuristicTagger()
        self.index = index if index is not None else HybridIndex(
            self.embedder, self.config.index,
            path_embedding=self.config.embedder.path_embedding)
        self.master_cache = MasterTagCache()

    @property
    def domain(self) -> str:
        return self.config.tagger.domain

    # -- offline ---------------------------------------------------------------

    def _augment_chunk(self, chunk: Chunk, master: list[str]) -> AugmentedChunk:
        paragraph = generate_paragraph_tags(chunk, self.tagger)
        path = build_path(master, paragraph)
        return AugmentedChunk(
            chunk=chunk,
            path=path,
            text_vector=embed_text([chunk.text], self.embedder)[0],
            path_vector=embed_path(path, self.embedder,
                                   self.config.embedder.path_embedding),
        )

    def ingest_document(self, doc: Document) -> DocumentIngestResult:
        replaced = self.index.has_document(doc.doc_id)
        if replaced:
            self.index.remove_document(doc.doc_id)
            self.master_cache.invalidate(doc.doc_id)
        master = master_or_fallback(doc, generate_master_tags(
            doc, self.config.tagger.max_master_tags, self.tagger,
            cache=self.master_cache))
        chunks = segment_document(doc, self.config.chunking.window_chars,
                                  self.config.chunking.overlap_chars)
        workers = self.config.llm.max_in_flight if isinstance(self.tagger, LlmTagger) else 1
        if workers > 1 and len(chunks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                items = list(pool.map(lambda c: self._augment_chunk(c, master), chunks))
        else:
            items = [self._augment_chunk(c, master) for c in chunks]
        self.index.upsert_chunks(items)
        return DocumentIngestResult(doc_id=doc.doc_id,
                                    chunk_ids=[c.chunk_id for c in items],
                                    replaced=replaced)

    def ingest_documents(self, docs: list[Document]) -> IngestReport:
        start = time.perf_counter()
        results = [self.ingest_document(doc) for doc in docs]
        return IngestReport(documents=results,
                            seconds=time.perf_counter() - start)

    def ingest_path(self, corpus_path: str, schema: str = "profiles") -> IngestReport:
        return self.ingest_documents(load_corpus(corpus_path, schema))

    # -- online ----------------------------------------------------------------

    def retrieve(self, question: str, k: int | None = None) -> list[SubQueryContext]:
        if len(self.index) == 0:
            raise EmptyIndexError("the index is empty; ingest documents first")
        return retrieve(question, self.index, self.embedder, self.llm,
                        self.config.retrieval, templates=self.templates,
                        domain=self.domain, k=k)

    def query(self, question: str, k: int | None = None,
              generate: bool = False, debug: bool = False) -> QueryResult:
        contexts = self.retrieve(question, k=k)
        answer = None
        if generate:
            answer = generate_answer(question, contexts, self.llm,
                                     self.templates, domain=self.domain,
                                     budget=self.config.prompt_budget,
                                     temperature=self.config.llm.temperature)
        trace = None
        if debug:
            trace = QueryDebugTrace(
                query=question,
                k=k if k is not None else self.config.retrieval.k,
                subqueries=[ctx.sub_query for ctx in contexts],
                stages=[_trace_stage(ctx) for ctx in contexts],
                answer=answer.text if answer else None,
            )
        return QueryResult(contexts=contexts, answer=answer, trace=trace)

    # -- curation ----------------------------------------------------------------

    def probe(self, probe_query: str, target: str, scope: str) -> dict:
        query_vec = embed_text([probe_query], self.embedder)[0]
        return self.index.probe(query_vec, target, scope)

    def tag_edit(self, target: str, scope: str, tag: str, action: str,
                 probe_query: str | None = None, actor: str = "local") -> dict:
        """Apply a tag injection or removal, optionally measuring the
        before/after tag-index distance and rank for a probe query."""
        before = self.probe(probe_query, target, scope) if probe_query else None
        if action == "inject":
            report = self.index.inject_tag(target, tag, scope, actor=actor)
        elif action == "remove":
            report = self.index.remove_tag(target, tag, scope, actor=actor)
        else:
            raise ValueError(f"unknown tag action {action!r}")
        after = self.probe(probe_query, target, scope) if probe_query else None
        result: dict[str, Any] = {
            "target": report.target,
            "scope": report.scope,
            "tag": report.tag,
            "action": report.action,
            "noop": report.noop,
            "affected_chunk_ids": report.affected_chunk_ids,
        }
        if probe_query is not None:
            result["probe"] = {
                "query": probe_query,
                "before": before,
                "after": after,
                "distance_delta": after["distance"] - before["distance"],
                "rank_delta": after["rank"] - before["rank"],
            }
        return result
