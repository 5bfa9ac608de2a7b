"""Tag induction and semantic path construction.

Each chunk carries a hierarchical path: document-global master tags followed
by chunk-local paragraph tags. Two tagger backends exist: an LLM-backed one
(JSON-array protocol over the completion client) and a deterministic
heuristic one (tf-idf-ranked informative terms) for offline runs and tests.
"""

from __future__ import annotations

import json
import logging
import math
import re
import threading
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Protocol

from .corpus import Chunk, Document
from .stopwords import ENGLISH_STOPWORDS

logger = logging.getLogger(__name__)

TAG_WORD_LIMIT = 4
MASTER = "master"
PARAGRAPH = "paragraph"
PARAGRAPH_TAG_COUNT = 3


class TaggingError(RuntimeError):
    """Raised when a tagger backend fails or returns unusable output."""


def normalize_tag(raw: str) -> str | None:
    """Strip punctuation and quotes, collapse whitespace, cap at 4 words.

    Case is passed through so proper nouns keep their surface form. Returns
    None when nothing survives.
    """
    cleaned = "".join(ch if (ch.isalnum() or ch.isspace()) else " " for ch in raw)
    words = cleaned.split()
    if not words:
        return None
    return " ".join(words[:TAG_WORD_LIMIT])


def normalize_tags(raw: list[str]) -> list[str]:
    """Normalize a raw tag list, dropping empties and case-insensitive
    duplicates (the first surface form wins)."""
    out: list[str] = []
    seen: set[str] = set()
    for item in raw:
        tag = normalize_tag(item)
        if tag is None:
            continue
        key = tag.casefold()
        if key in seen:
            continue
        seen.add(key)
        out.append(tag)
    return out


@dataclass(frozen=True)
class SemanticPath:
    """Ordered master tags followed by paragraph tags."""

    master: tuple[str, ...]
    paragraph: tuple[str, ...]

    def tags(self) -> tuple[str, ...]:
        return self.master + self.paragraph

    def display(self) -> str:
        return " → ".join(self.tags())

    def has_tag(self, tag: str) -> bool:
        key = tag.casefold()
        return any(t.casefold() == key for t in self.tags())


def build_path(master: list[str] | tuple[str, ...],
               paragraph: list[str] | tuple[str, ...]) -> SemanticPath:
    """Fuse master and paragraph tags into a path, master segment first.

    Paragraph tags that duplicate a master tag (case-insensitively) are
    dropped. An empty paragraph segment is allowed (fallbacks exhausted);
    an empty master segment is not.
    """
    if not master:
        raise ValueError("master tag list must be non-empty")
    master_keys = {t.casefold() for t in master}
    para = tuple(t for t in paragraph if t.casefold() not in master_keys)
    return SemanticPath(master=tuple(master), paragraph=para)


class Tagger(Protocol):
    def tag(self, kind: str, text: str, limit: int) -> list[str]:
        """Return up to ``limit`` raw tag strings for ``text``."""
        ...


_TOKEN_RE = re.compile(r"[a-z0-9]+")
_SENTENCE_SPLIT_RE = re.compile(r"[.!?\n]+")
_TRAILING_BREAK = (".", "!", "?", ";", ":")


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _proper_phrases(text: str) -> Counter:
    """Count maximal runs of capitalized words as multi-word phrase
    candidates (lowercased, edge stopwords trimmed, 2-4 words)."""
    phrases: Counter = Counter()
    run: list[str] = []

    def flush() -> None:
        nonlocal run
        words = [w for w in run]
        while words and words[0] in ENGLISH_STOPWORDS:
            words = words[1:]
        while words and words[-1] in ENGLISH_STOPWORDS:
            words = words[:-1]
        if len(words) >= 2:
            phrases[" ".join(words[:TAG_WORD_LIMIT])] += 1
        run = []

    for raw_word in text.split():
        stripped = raw_word.strip("\"'()[]{},.;:!?")
        if stripped and stripped[0].isupper():
            tokens = _tokenize(stripped)
            if tokens:
                run.extend(tokens)
            if raw_word.endswith(_TRAILING_BREAK):
                flush()
        else:
            flush()
    flush()
    return phrases


class HeuristicTagger:
    """Deterministic tagger: top-N informative terms by tf × idf.

    Term frequency is counted over the whole text; document frequency over
    the text's own sentence/line segments. Candidates are non-stopword
    unigrams plus capitalized multi-word runs (proper terms). Ties break
    lexicographically, so identical input always yields identical tags.
    """

    def __init__(self, stopwords: frozenset[str] = ENGLISH_STOPWORDS):
        self.stopwords = stopwords

    def tag(self, kind: str, text: str, limit: int) -> list[str]:
        if limit < 1:
            return []
        tokens = _tokenize(text)
        if not tokens:
            return []
        segments = [s for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]
        segment_tokens = [set(_tokenize(s)) for s in segments] or [set(tokens)]
        n_segments = len(segment_tokens)

        counts = Counter(tokens)
        candidates: Counter = Counter()
        for token, freq in counts.items():
            if token in self.stopwords or len(token) < 2:
                continue
            candidates[token] = freq
        for phrase, freq in _proper_phrases(text).items():
            candidates[phrase] = max(candidates.get(phrase, 0), freq)

        def idf(term: str) -> float:
            words = term.split()
            df = sum(1 for seg in segment_tokens if all(w in seg for w in words))
            return math.log(1.0 + n_segments / max(df, 1))

        scored = sorted(
            ((freq * idf(term), term) for term, freq in candidates.items()),
            key=lambda pair: (-pair[0], pair[1]),
        )
        return [term for _, term in scored[:limit]]


_JSON_ARRAY_RE = re.compile(r"\[.*\]", re.DOTALL)


def parse_tag_array(completion: str) -> list[str]:
    """Parse a completion expected to be a JSON array of strings."""
    text = completion.strip()
    if text.startswith("```"):
        text = re.sub(r"^```[a-zA-Z]*\n?|\n?```$", "", text).strip()
    m = _JSON_ARRAY_RE.search(text)
    if m is None:
        raise TaggingError(f"no JSON array in tagger output: {completion[:120]!r}")
    try:
        data = json.loads(m.group(0))
    except json.JSONDecodeError as exc:
        raise TaggingError(f"invalid JSON array in tagger output: {exc}") from exc
    if not isinstance(data, list) or not all(isinstance(x, str) for x in data):
        raise TaggingError("tagger output is not an array of strings")
    return data


class LlmTagger:
    """LLM-backed tagger using the prompt templates.

    Unparseable output triggers one retry with a reminder to return only the
    array; a second failure is a hard error.
    """

    def __init__(self, client, templates, domain: str = "general"):
        self.client = client
        self.templates = templates
        self.domain = domain

    def tag(self, kind: str, text: str, limit: int) -> list[str]:
        template = self.templates.master if kind == MASTER else self.templates.paragraph
        system, user = template.render(
            DOMAIN=self.domain, max_tags=str(limit), text=text
        )
        last_error: TaggingError | None = None
        for attempt in range(2):
            try:
                completion = self.client.complete(system, user)
            except Exception as exc:  # backend failure is not retried here
                raise TaggingError(f"tagger backend failure: {exc}") from exc
            try:
                return parse_tag_array(completion)
            except TaggingError as exc:
                last_error = exc
                if attempt == 0:
                    user = user + "\n\nReturn ONLY the JSON array of strings, nothing else."
        raise TaggingError(f"tagger output unparseable after retry: {last_error}")


class MasterTagCache:
    """Per-doc_id cache so every chunk of a document shares identical master
    tags. Concurrent readers are safe; insertion is serialized."""

    def __init__(self) -> None:
        self._cache: dict[str, list[str]] = {}
        self._lock = threading.Lock()

    def get_or_compute(self, doc_id: str, compute: Callable[[], list[str]]) -> list[str]:
        cached = self._cache.get(doc_id)
        if cached is not None:
            return list(cached)
        with self._lock:
            cached = self._cache.get(doc_id)
            if cached is None:
                cached = compute()
                self._cache[doc_id] = list(cached)
            return list(cached)

    def invalidate(self, doc_id: str) -> None:
        with self._lock:
            self._cache.pop(doc_id, None)


def generate_master_tags(doc: Document, max_tags: int, tagger: Tagger,
                         cache: MasterTagCache | None = None) -> list[str]:
    """Document-global tags, normalized and capped at ``max_tags``.

    An empty result is legal; path construction falls back to the document
    title or id (see :func:`master_or_fallback`).
    """
    if max_tags < 1:
        raise ValueError("max_tags must be >= 1")

    def compute() -> list[str]:
        try:
            raw = tagger.tag(MASTER, doc.text, max_tags)
        except TaggingError as exc:
            raise TaggingError(f"master tagging failed for {doc.doc_id}: {exc}") from exc
        return normalize_tags(raw)[:max_tags]

    if cache is not None:
        return cache.get_or_compute(doc.doc_id, compute)
    return compute()


def master_or_fallback(doc: Document, master: list[str]) -> list[str]:
    """Guarantee a non-empty master segment: fall back to title, then id."""
    if master:
        return master
    fallback = normalize_tag(doc.title) or normalize_tag(doc.doc_id) or doc.doc_id
    return [fallback]


def generate_paragraph_tags(chunk: Chunk, tagger: Tagger) -> list[str]:
    """Chunk-local tags: gist, subjects, domain (up to 3 after
    normalization). Falls back to the chunk's most frequent non-stopword
    token when the tagger yields nothing usable."""
    try:
        raw = tagger.tag(PARAGRAPH, chunk.text, PARAGRAPH_TAG_COUNT)
    except TaggingError as exc:
        raise TaggingError(f"paragraph tagging failed for {chunk.chunk_id}: {exc}") from exc
    tags = normalize_tags(raw)[:PARAGRAPH_TAG_COUNT]
    if tags:
        return tags
    counts = Counter(t for t in _tokenize(chunk.text) if t not in ENGLISH_STOPWORDS)
    if not counts:
        counts = Counter(_tokenize(chunk.text))
    if counts:
        best = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]
        return [best]
    logger.warning("chunk %s produced no paragraph tags; flagged for review",
                   chunk.chunk_id)
    return []
