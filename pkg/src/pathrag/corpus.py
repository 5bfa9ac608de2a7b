"""Corpus loading and sliding-window document segmentation.

Two on-disk corpus schemas are supported:

* profiles: one UTF-8 text file per document; the filename stem is the
  doc_id; an optional leading ``key: value`` header block terminated by a
  blank line becomes the document metadata.
* qa: a JSON-lines file of ``{question, answer, doc_id}`` records.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path


class CorpusError(ValueError):
    """Raised for missing files, malformed records, or duplicate doc ids."""


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    title: str = ""
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.doc_id:
            raise CorpusError("document requires a non-empty doc_id")
        if not self.text:
            raise CorpusError(f"document {self.doc_id!r} has empty text")


@dataclass(frozen=True)
class Chunk:
    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    char_span: tuple[int, int]


@dataclass(frozen=True)
class QaRecord:
    question: str
    answer: str
    doc_id: str


def make_chunk_id(doc_id: str, ordinal: int) -> str:
    """Chunk ids are "{doc_id}#{ordinal}" so a document's chunk set is
    recoverable by prefix."""
    return f"{doc_id}#{ordinal}"


def doc_id_of_chunk(chunk_id: str) -> str:
    return chunk_id.rsplit("#", 1)[0]


_HEADER_LINE_RE = re.compile(r"^([A-Za-z0-9_.\-]+):\s*(.*)$")


def _parse_profile(raw: str) -> tuple[dict[str, str], str]:
    """Split an optional leading key:value header block from the body."""
    lines = raw.split("\n")
    header: dict[str, str] = {}
    body_start = 0
    for i, line in enumerate(lines):
        if line.strip() == "":
            body_start = i + 1
            break
        m = _HEADER_LINE_RE.match(line)
        if m is None:
            return {}, raw
        header[m.group(1)] = m.group(2).strip()
    else:
        # No blank line: the whole file is body.
        return {}, raw
    if not header:
        return {}, raw
    return header, "\n".join(lines[body_start:])


def load_corpus(path: str | Path, schema: str = "profiles") -> list[Document]:
    """Load all documents under ``path`` for the given schema.

    Order is deterministic: profile files sorted by filename; QA-derived
    corpora are not supported here (see :func:`load_qa`).
    """
    if schema != "profiles":
        raise CorpusError(f"unknown corpus schema {schema!r}")
    root = Path(path)
    if not root.exists():
        raise CorpusError(f"corpus path not found: {root}")
    files = sorted(p for p in root.iterdir() if p.is_file()) if root.is_dir() else [root]
    docs: list[Document] = []
    seen: dict[str, Path] = {}
    for fp in files:
        doc_id = fp.stem
        if doc_id in seen:
            raise CorpusError(
                f"duplicate doc_id {doc_id!r} ({seen[doc_id].name} and {fp.name})"
            )
        seen[doc_id] = fp
        raw = fp.read_text(encoding="utf-8")
        metadata, body = _parse_profile(raw)
        body = body.strip("\n")
        if not body.strip():
            raise CorpusError(f"profile {fp.name} has an empty body")
        title = metadata.get("title", "")
        docs.append(Document(doc_id=doc_id, text=body, title=title, metadata=metadata))
    return docs


def load_qa(path: str | Path) -> list[QaRecord]:
    """Load a QA mapping file (JSON lines of question/answer/doc_id)."""
    fp = Path(path)
    if not fp.exists():
        raise CorpusError(f"qa file not found: {fp}")
    records: list[QaRecord] = []
    for lineno, line in enumerate(fp.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            data = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{fp.name}:{lineno}: invalid JSON record: {exc}") from exc
        missing = {"question", "answer", "doc_id"} - set(data)
        if missing:
            raise CorpusError(
                f"{fp.name}:{lineno}: record missing fields {sorted(missing)}"
            )
        records.append(QaRecord(str(data["question"]), str(data["answer"]), str(data["doc_id"])))
    return records


def _snap_left(text: str, start: int, end: int, tail: int, overlap: int) -> int:
    """Move a window boundary left onto whitespace inside the trailing tail.

    Returns the adjusted end, or the original end when no whitespace exists
    in the tail or snapping would stall the sliding window.
    """
    lo = max(start + 1, end - tail)
    for i in range(end - 1, lo - 1, -1):
        if text[i].isspace():
            cut = i + 1
            # The next window starts at cut - overlap; never move backwards.
            if cut - overlap > start:
                return cut
            break
    return end


def segment_document(doc: Document, window_chars: int = 500,
                     overlap_chars: int = 0) -> list[Chunk]:
    """Split a document into sliding-window chunks.

    Consecutive windows advance by ``window_chars - overlap_chars``. When a
    window boundary falls mid-text, it is pulled left to the nearest
    whitespace within the trailing 10% of the window; with no whitespace
    there, the split is a hard cut. Spans tile the document: every character
    is covered and chunk texts are exact substrings.
    """
    if window_chars < 1:
        raise ValueError("window_chars must be >= 1")
    if not 0 <= overlap_chars < window_chars:
        raise ValueError("overlap_chars must satisfy 0 <= overlap < window")
    text = doc.text
    n = len(text)
    tail = max(1, window_chars // 10)
    chunks: list[Chunk] = []
    start = 0
    ordinal = 0
    while True:
        end = min(start + window_chars, n)
        if end < n:
            end = _snap_left(text, start, end, tail, overlap_chars)
        chunks.append(Chunk(
            chunk_id=make_chunk_id(doc.doc_id, ordinal),
            doc_id=doc.doc_id,
            ordinal=ordinal,
            text=text[start:end],
            char_span=(start, end),
        ))
        if end >= n:
            break
        start = end - overlap_chars
        ordinal += 1
    return chunks
