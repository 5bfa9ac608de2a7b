#!/usr/bin/env python3
"""Run the full online pipeline with scripted agents: query rewriting into
sub-queries, coarse retrieval (tag + sparse), weighted reciprocal-rank
fusion with the semantic signal, pruning, and structured generation."""

from pathlib import Path

from pathrag.corpus import load_corpus
from pathrag.generation import NullCompletionClient, ScriptedCompletionClient
from pathrag.pipeline import Engine

DATA = Path(__file__).parent / "data" / "profiles"

# Scripted LLM fixtures keep the demo offline and deterministic. Responses
# are routed by template markers in the user prompt.
script = {
    "Decompose the user query": '["harbor terminal throughput", "container volume 2023"]',
    "Chunk (path header first)": "Harbor Logistics throughput grew to 2.4 million TEU in 2023.",
    "Question:": "2.4 million TEU",
}

engine = Engine(llm=ScriptedCompletionClient(responses=script))
engine.ingest_documents(load_corpus(DATA))

question = "What was Harbor Logistics container throughput in 2023?"
result = engine.query(question, k=3, generate=True, debug=True)

print(f"question: {question}")
print(f"\nsub-queries (original first): {result.trace.subqueries}")

for stage in result.trace.stages:
    print(f"\n[{stage['sub_query']}]")
    print(f"  candidates: {len(stage['candidates'])}")
    for fused in stage["fused"]:
        print(f"  fused #{fused['sources_ranked']}src "
              f"S={fused['score']:.6f} {fused['chunk_id']}")
    for pruned in stage["pruned"]:
        print(f"  pruned evidence [{pruned['chunk_id']}] {pruned['text'][:50]!r}")

print(f"\nanswer: {result.answer.text}")
print(f"prompt fingerprint: {result.answer.prompt_fingerprint[:16]}...")

# Degradation: with the null backend the pipeline still answers retrieval
# requests (original query only, passthrough pruning).
offline = Engine(llm=NullCompletionClient())
offline.ingest_documents(load_corpus(DATA))
fallback = offline.query(question, k=3)
print(f"\nnull-backend mode evidence: "
      f"{[p.chunk_id for p in fallback.contexts[0].pruned]}")
