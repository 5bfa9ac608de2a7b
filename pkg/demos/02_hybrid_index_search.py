#!/usr/bin/env python3
"""Build the triple index over the demo corpus and query each sub-index
directly: path vectors (L2), text vectors (cosine), and BM25 postings."""

from pathlib import Path

from pathrag.config import EngineConfig
from pathrag.corpus import load_corpus
from pathrag.embedding import embed_text
from pathrag.generation import NullCompletionClient
from pathrag.pipeline import Engine

DATA = Path(__file__).parent / "data" / "profiles"

cfg = EngineConfig()
engine = Engine(cfg, llm=NullCompletionClient())
report = engine.ingest_documents(load_corpus(DATA))
stats = engine.index.stats()
print(f"ingested {len(report.documents)} docs -> {stats['chunk_count']} chunks "
      f"in {report.seconds:.2f}s (avg {stats['avg_chunk_tokens']:.1f} tokens/chunk)")

query = "container terminal capacity"
qvec = embed_text([query], engine.embedder)[0]

print(f"\nquery: {query!r}")
print("\ntag index (structural, L2 distance, smaller = closer):")
for hit in engine.index.search_tag(qvec, 3):
    path = engine.index.get_chunk(hit.chunk_id).path.display()
    print(f"  #{hit.rank} {hit.chunk_id:22s} dist={hit.score:.4f}  {path}")

print("\ndense index (semantic, cosine, larger = closer):")
for hit in engine.index.search_dense(qvec, 3):
    print(f"  #{hit.rank} {hit.chunk_id:22s} cos={hit.score:.4f}")

print("\nsparse index (lexical, BM25):")
for hit in engine.index.search_sparse(query, 3):
    print(f"  #{hit.rank} {hit.chunk_id:22s} bm25={hit.score:.4f}")

# Incremental updates never rebuild: drop a document and search again.
engine.index.remove_document("kite-telecom")
print(f"\nafter removing kite-telecom: {engine.index.stats()['chunk_count']} chunks, "
      f"doc ids = {engine.index.doc_ids()}")

# Persistence round-trip: the on-disk directory is self-describing.
out = Path(__file__).parent / "_index_demo"
engine.index.persist(out)
print(f"persisted to {out}/ with files: "
      f"{sorted(p.name for p in out.iterdir())}")
