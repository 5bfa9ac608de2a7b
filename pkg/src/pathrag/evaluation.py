"""Retrieval and generation metrics plus the benchmark harness.

Ground truth for a query is every chunk derived from its gold source
document (recoverable by chunk-id prefix). Hit Rate@k asks whether any
ground-truth chunk appears in the top k; Precision@k divides the
intersection size by k even when fewer than k chunks were retrieved.
ROUGE-L is token-level LCS F1. BERTScore is reported as "not computed"
(it needs a pretrained transformer this package does not ship).
"""

from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from .config import EngineConfig
from .corpus import load_corpus, load_qa, make_chunk_id
from .embedding import embed_text
from .generation import CompletionClient, generate_answer
from .pipeline import Engine
from .retrieval import PrunedEvidence, SubQueryContext

logger = logging.getLogger(__name__)

METHODS = ("pathrag", "vss", "sparse", "hybrid")


# -- metrics -------------------------------------------------------------------

def hit_rate_at_k(retrieved: Sequence[str], ground_truth: set[str], k: int) -> int:
    """1 if any ground-truth chunk appears in the top k retrieved, else 0."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ground_truth:
        raise ValueError("ground-truth chunk set is empty")
    return int(any(cid in ground_truth for cid in retrieved[:k]))


def precision_at_k(retrieved: Sequence[str], ground_truth: set[str], k: int) -> float:
    """|top-k retrieved ∩ ground truth| / k.

    The denominator is k even when fewer than k chunks were retrieved.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not ground_truth:
        raise ValueError("ground-truth chunk set is empty")
    hits = sum(1 for cid in set(retrieved[:k]) if cid in ground_truth)
    return hits / k


def _lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0] * (len(b) + 1)
        for j, y in enumerate(b, start=1):
            if x == y:
                cur[j] = prev[j - 1] + 1
            else:
                cur[j] = max(prev[j], cur[j - 1])
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """Token-level (lowercase, whitespace-split) LCS F1 in [0, 1]."""
    cand = candidate.lower().split()
    ref = reference.lower().split()
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    return 2 * precision * recall / (precision + recall)


# -- benchmark harness -----------------------------------------------------------

@dataclass
class EvalRecord:
    question: str
    reference_answer: str
    gold_doc_id: str
    ground_truth: set[str]
    retrieved: list[str] = field(default_factory=list)
    answer: str | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "question": self.question,
            "reference_answer": self.reference_answer,
            "gold_doc_id": self.gold_doc_id,
            "ground_truth": sorted(self.ground_truth),
            "retrieved": self.retrieved,
            "answer": self.answer,
        }


@dataclass
class BenchmarkReport:
    method: str
    n_queries: int
    per_k: dict[int, dict[str, float]]
    rouge_l_mean: float | None
    bertscore: str
    timings: dict[str, float]
    config_snapshot: dict[str, Any]
    records: list[EvalRecord] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "n_queries": self.n_queries,
            "per_k": {str(k): v for k, v in self.per_k.items()},
            "rouge_l_mean": self.rouge_l_mean,
            "bertscore": self.bertscore,
            "timings": self.timings,
            "config": self.config_snapshot,
            "notes": self.notes,
            "records": [r.to_dict() for r in self.records],
        }

    def write(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")


def ground_truth_for(engine: Engine, gold_doc_id: str) -> set[str]:
    """All chunk ids derived from the gold document (prefix rule)."""
    prefix = make_chunk_id(gold_doc_id, 0)[:-1]
    return {cid for cid in engine.index.chunk_ids() if cid.startswith(prefix)}


def _fused_union_ranking(contexts: list[SubQueryContext]) -> list[str]:
    """Dedup-union of per-sub-query fused lists, ordered by the best fused
    score a chunk achieved across sub-queries (ties by chunk_id)."""
    best: dict[str, float] = {}
    for ctx in contexts:
        for cand in ctx.fused:
            score = cand.fused_score or 0.0
            if cand.chunk_id not in best or score > best[cand.chunk_id]:
                best[cand.chunk_id] = score
    return [cid for cid, _ in sorted(best.items(), key=lambda kv: (-kv[1], kv[0]))]


def _hybrid_ranking(engine: Engine, question: str, depth: int) -> list[str]:
    """Equal-weight RRF over the dense and sparse lists (the classic
    two-signal hybrid baseline)."""
    qvec = embed_text([question], engine.embedder)[0]
    dense = engine.index.search_dense(qvec, depth)
    sparse = engine.index.search_sparse(question, depth)
    eta = engine.config.retrieval.eta
    scores: dict[str, float] = {}
    for hits in (dense, sparse):
        for hit in hits:
            scores[hit.chunk_id] = scores.get(hit.chunk_id, 0.0) + 0.5 / (eta + hit.rank)
    return [cid for cid, _ in sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))]


def _rank_for_method(engine: Engine, method: str, question: str,
                     depth: int) -> list[str]:
    if method == "pathrag":
        return _fused_union_ranking(engine.retrieve(question, k=depth))
    if method == "vss":
        qvec = embed_text([question], engine.embedder)[0]
        return [h.chunk_id for h in engine.index.search_dense(qvec, depth)]
    if method == "sparse":
        return [h.chunk_id for h in engine.index.search_sparse(question, depth)]
    if method == "hybrid":
        return _hybrid_ranking(engine, question, depth)
    raise ValueError(f"unknown benchmark method {method!r}; expected one of {METHODS}")


def _generate_for_method(engine: Engine, method: str, question: str,
                         k: int, client: CompletionClient) -> str:
    if method == "pathrag":
        contexts = engine.retrieve(question, k=k)
    else:
        ranking = _rank_for_method(engine, method, question, k)[:k]
        evidence = [PrunedEvidence(cid, engine.index.get_chunk(cid).chunk.text,
                                   engine.index.get_chunk(cid).path.display())
                    for cid in ranking]
        contexts = [SubQueryContext(sub_query=question, pruned=evidence)]
    answer = generate_answer(question, contexts, client, engine.templates,
                             domain=engine.domain,
                             budget=engine.config.prompt_budget,
                             temperature=engine.config.llm.temperature)
    return answer.text


def run_benchmark(corpus_path: str | Path, qa_path: str | Path, method: str,
                  config: EngineConfig | None = None,
                  engine: Engine | None = None) -> BenchmarkReport:
    """Build the index once, then evaluate every query.

    Offline index construction, online retrieval, and generation are timed
    separately. Retrieval metrics are computed at k in eval.retrieval_ks;
    generation (when the completion backend is available) uses
    eval.generation_k contexts and is scored with ROUGE-L against the
    reference answers.
    """
    if method not in METHODS:
        raise ValueError(f"unknown benchmark method {method!r}; expected one of {METHODS}")
    config = config or (engine.config if engine else EngineConfig())
    qa = load_qa(qa_path)

    if engine is None:
        engine = Engine(config)
    docs = load_corpus(corpus_path)
    t0 = time.perf_counter()
    engine.ingest_documents(docs)
    construction_s = time.perf_counter() - t0

    ks = list(config.eval.retrieval_ks)
    depth = max(ks)
    records = [EvalRecord(question=rec.question, reference_answer=rec.answer,
                          gold_doc_id=rec.doc_id,
                          ground_truth=ground_truth_for(engine, rec.doc_id))
               for rec in qa]
    missing = [r.gold_doc_id for r in records if not r.ground_truth]
    if missing:
        raise ValueError(f"gold documents not in the corpus: {sorted(set(missing))}")

    def _retrieve(record: EvalRecord) -> None:
        record.retrieved = _rank_for_method(engine, method, record.question, depth)

    t0 = time.perf_counter()
    workers = max(1, config.eval.concurrency)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(_retrieve, records))
    else:
        for record in records:
            _retrieve(record)
    retrieval_s = time.perf_counter() - t0

    notes = ["BERTScore: not computed (requires a pretrained transformer)"]
    generation_s = 0.0
    rouge_mean: float | None = None
    if engine.llm.kind != "null":
        def _generate(record: EvalRecord) -> None:
            record.answer = _generate_for_method(
                engine, method, record.question, config.eval.generation_k, engine.llm)

        t0 = time.perf_counter()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(_generate, records))
        else:
            for record in records:
                _generate(record)
        generation_s = time.perf_counter() - t0
        scores = [rouge_l(r.answer or "", r.reference_answer) for r in records]
        rouge_mean = sum(scores) / len(scores) if scores else None
    else:
        notes.append("generation skipped: null completion backend")

    per_k: dict[int, dict[str, float]] = {}
    for k in ks:
        hits = [hit_rate_at_k(r.retrieved, r.ground_truth, k) for r in records]
        precs = [precision_at_k(r.retrieved, r.ground_truth, k) for r in records]
        per_k[k] = {
            "hit_rate": sum(hits) / len(hits) if hits else 0.0,
            "precision": sum(precs) / len(precs) if precs else 0.0,
        }

    return BenchmarkReport(
        method=method,
        n_queries=len(records),
        per_k=per_k,
        rouge_l_mean=rouge_mean,
        bertscore="not computed",
        timings={
            "index_construction_s": construction_s,
            "retrieval_s": retrieval_s,
            "generation_s": generation_s,
        },
        config_snapshot=config.to_dict(),
        records=records,
        notes=notes,
    )


def render_table(reports: list[BenchmarkReport]) -> str:
    """Aligned plain-text table: one row per method, Hit/Prec. columns per k."""
    if not reports:
        return "(no reports)"
    ks = sorted({k for rep in reports for k in rep.per_k})
    header1 = f"{'Method':<12}"
    header2 = f"{'':<12}"
    for k in ks:
        header1 += f"{f'k={k}':^18}"
        header2 += f"{'Hit':>9}{'Prec.':>9}"
    header1 += f"{'ROUGE-L':>10}"
    header2 += f"{'':>10}"
    lines = [header1, header2, "-" * len(header2)]
    for rep in reports:
        row = f"{rep.method:<12}"
        for k in ks:
            cell = rep.per_k.get(k, {})
            row += f"{cell.get('hit_rate', float('nan')):>9.3f}"
            row += f"{cell.get('precision', float('nan')):>9.3f}"
        row += f"{rep.rouge_l_mean:>10.4f}" if rep.rouge_l_mean is not None else f"{'n/a':>10}"
        lines.append(row)
    return "\n".join(lines)
