#!/usr/bin/env python3
"""The human-in-the-loop curation loop: a probe query ranks poorly against
a document's path, an expert injects the missing tag, and the distance and
rank improve immediately. Tag edits are audited in the index edit log."""

from pathlib import Path

from pathrag.corpus import load_corpus
from pathrag.generation import NullCompletionClient
from pathrag.pipeline import Engine

DATA = Path(__file__).parent / "data" / "profiles"

engine = Engine(llm=NullCompletionClient())
engine.ingest_documents(load_corpus(DATA))

doc_id = "arta-bank"
probe = "diversified business model"

print(f"paths of {doc_id} before the edit:")
for item in engine.index.chunks_of(doc_id)[:2]:
    print(f"  {item.chunk_id}: {item.path.display()}")

# The automated tags describe banking concepts but miss the probe phrasing,
# so the tag-index match is weak.
before = engine.probe(probe, doc_id, "document")
print(f"\nprobe {probe!r} before: distance={before['distance']:.4f} "
      f"rank={before['rank']}")

result = engine.tag_edit(doc_id, "document", probe, "inject",
                         probe_query=probe, actor="analyst")
after = result["probe"]["after"]
print(f"injected {result['tag']!r} into {len(result['affected_chunk_ids'])} chunks")
print(f"probe after: distance={after['distance']:.4f} rank={after['rank']} "
      f"(delta {result['probe']['distance_delta']:+.4f})")

# Idempotence: the same injection again is a no-op.
again = engine.tag_edit(doc_id, "document", probe, "inject", probe_query=probe)
print(f"\nre-inject no-op: {again['noop']}, "
      f"distance delta {again['probe']['distance_delta']:+.4f}")

# The inverse edit restores the original state.
engine.tag_edit(doc_id, "document", probe, "remove")
restored = engine.probe(probe, doc_id, "document")
print(f"after removal: distance={restored['distance']:.4f} "
      f"rank={restored['rank']}")

print("\naudit log:")
for record in engine.index.edit_log:
    print(f"  {record['ts']} {record['actor']:8s} {record['action']:6s} "
          f"{record.get('tag', '')!r} noop={record.get('noop')}")
