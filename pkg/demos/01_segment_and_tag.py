#!/usr/bin/env python3
"""Walk through the offline augmentation steps one at a time:
load a corpus, segment a document with the sliding window, induce master
and paragraph tags, and fuse them into semantic paths."""

from pathlib import Path

from pathrag.corpus import load_corpus, segment_document
from pathrag.tagging import (HeuristicTagger, build_path, generate_master_tags,
                             generate_paragraph_tags, master_or_fallback)

DATA = Path(__file__).parent / "data" / "profiles"

docs = load_corpus(DATA)
print(f"loaded {len(docs)} documents: {[d.doc_id for d in docs]}")

doc = next(d for d in docs if d.doc_id == "arta-bank")
print(f"\n--- {doc.doc_id} ({doc.title}), {len(doc.text)} chars ---")
print(f"metadata: {doc.metadata}")

# Sliding-window segmentation: 500-char windows, boundaries snapped left to
# whitespace within the trailing 10% of the window.
chunks = segment_document(doc, window_chars=500, overlap_chars=0)
print(f"\nsegmented into {len(chunks)} chunks:")
for chunk in chunks:
    start, end = chunk.char_span
    print(f"  {chunk.chunk_id}: [{start:4d}:{end:4d}] {chunk.text[:60]!r}...")

# The heuristic tagger is fully deterministic: informative terms ranked by
# tf-idf over the text's own sentences, capitalized runs as phrases.
tagger = HeuristicTagger()
master = master_or_fallback(doc, generate_master_tags(doc, 5, tagger))
print(f"\nmaster tags (document-global): {master}")

for chunk in chunks[:3]:
    paragraph = generate_paragraph_tags(chunk, tagger)
    path = build_path(master, paragraph)
    print(f"\n{chunk.chunk_id} paragraph tags: {paragraph}")
    print(f"  path: {path.display()}")
