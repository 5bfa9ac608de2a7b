"""Completion clients, prompt templates, and structured answer generation.

The final prompt groups pruned evidence under the sub-query that retrieved
it, with each evidence item's path displayed on a header line, so the
generator can tell apart look-alike facts from different documents.
"""

from __future__ import annotations

import hashlib
import logging
import os
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Protocol

from .config import LLM_API_KEY_ENV, LlmConfig

logger = logging.getLogger(__name__)

NO_EVIDENCE_MARKER = "(no evidence found)"
ABSTAIN_NOTE = ("No evidence was retrieved for any sub-query. Say that the "
                "question cannot be answered from the available documents.")


class CompletionError(RuntimeError):
    def __init__(self, message: str, prompt_fingerprint: str | None = None):
        super().__init__(message)
        self.prompt_fingerprint = prompt_fingerprint


class CompletionUnavailable(CompletionError):
    """The configured backend cannot serve completions (null backend)."""


class CompletionClient(Protocol):
    kind: str

    def complete(self, system: str, user: str, temperature: float = 0.0) -> str:
        ...


class NullCompletionClient:
    """Fails fast, forcing every degradation path: rewriting collapses to
    the original query, pruning passes through, generation errors out."""

    kind = "null"

    def complete(self, system: str, user: str, temperature: float = 0.0) -> str:
        raise CompletionUnavailable("null completion backend")


class ScriptedCompletionClient:
    """Fixture-driven client for tests: responses matched by substring of
    the user message (insertion order), then a FIFO queue, then a default.
    Every call is recorded for request-capture assertions."""

    kind = "scripted"

    def __init__(self, responses: dict[str, str] | None = None,
                 queue: list[str] | None = None, default: str | None = None):
        self.responses = dict(responses or {})
        self.queue = list(queue or [])
        self.default = default
        self.calls: list[tuple[str, str]] = []

    def complete(self, system: str, user: str, temperature: float = 0.0) -> str:
        self.calls.append((system, user))
        for needle, response in self.responses.items():
            if needle in user:
                return response
        if self.queue:
            return self.queue.pop(0)
        if self.default is not None:
            return self.default
        raise CompletionError(f"no scripted response for prompt: {user[:80]!r}")


class RemoteCompletionClient:
    """JSON-over-HTTP chat protocol: POST {model, messages, temperature} ->
    {choices: [{message: {content}}]}. One retry with exponential backoff."""

    kind = "remote"

    def __init__(self, endpoint: str, model: str, timeout_s: float = 60.0,
                 max_retries: int = 1):
        self.endpoint = endpoint
        self.model = model
        self.timeout_s = timeout_s
        self.max_retries = max_retries

    def complete(self, system: str, user: str, temperature: float = 0.0) -> str:
        import httpx

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(LLM_API_KEY_ENV)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [
                {"role": "system", "content": system},
                {"role": "user", "content": user},
            ],
            "temperature": temperature,
        }
        last_exc: Exception | None = None
        for attempt in range(self.max_retries + 1):
            try:
                resp = httpx.post(self.endpoint, json=payload, headers=headers,
                                  timeout=self.timeout_s)
                resp.raise_for_status()
                return resp.json()["choices"][0]["message"]["content"]
            except Exception as exc:
                last_exc = exc
                if attempt < self.max_retries:
                    time.sleep(0.5 * 2 ** attempt)
        raise CompletionError(f"completion backend failure: {last_exc}")


def build_completion_client(cfg: LlmConfig) -> CompletionClient:
    if cfg.kind == "null":
        return NullCompletionClient()
    if cfg.kind == "remote":
        if not cfg.endpoint or not cfg.model:
            raise CompletionError("remote llm requires endpoint and model")
        return RemoteCompletionClient(cfg.endpoint, cfg.model,
                                      timeout_s=cfg.timeout_s)
    raise CompletionError(f"unknown llm kind {cfg.kind!r}")


# -- prompt templates ---------------------------------------------------------

_TEMPLATE_SEPARATOR = "\n---\n"
_TEMPLATE_FILES = {
    "master": "master_tags.txt",
    "paragraph": "paragraph_tags.txt",
    "rewrite": "rewrite_query.txt",
    "prune": "prune_context.txt",
    "answer": "answer_question.txt",
}


@dataclass(frozen=True)
class PromptTemplate:
    """A system/user template pair with literal placeholder substitution
    ({{DOMAIN}}, {max_tags}, {text}, {q}, {max_n}, {hist}, {sub_query},
    {prompt})."""

    system: str
    user: str

    @classmethod
    def parse(cls, raw: str) -> "PromptTemplate":
        if _TEMPLATE_SEPARATOR not in raw:
            raise ValueError("template file needs a '---' separator line")
        system, user = raw.split(_TEMPLATE_SEPARATOR, 1)
        return cls(system=system.strip(), user=user.strip())

    def render(self, **values: str) -> tuple[str, str]:
        system, user = self.system, self.user
        for key, value in values.items():
            placeholder = "{{DOMAIN}}" if key == "DOMAIN" else "{%s}" % key
            system = system.replace(placeholder, value)
            user = user.replace(placeholder, value)
        return system, user


@dataclass(frozen=True)
class PromptTemplates:
    master: PromptTemplate
    paragraph: PromptTemplate
    rewrite: PromptTemplate
    prune: PromptTemplate
    answer: PromptTemplate


def load_templates(directory: str | Path | None = None) -> PromptTemplates:
    """Load templates from a directory of editable text files; any file
    missing there (or no directory at all) falls back to the packaged
    defaults."""
    parsed: dict[str, PromptTemplate] = {}
    for name, filename in _TEMPLATE_FILES.items():
        raw: str | None = None
        if directory is not None:
            fp = Path(directory) / filename
            if fp.exists():
                raw = fp.read_text(encoding="utf-8")
        if raw is None:
            raw = resources.files("pathrag.prompts").joinpath(filename).read_text("utf-8")
        parsed[name] = PromptTemplate.parse(raw)
    return PromptTemplates(**parsed)


# -- prompt assembly and generation -------------------------------------------

@dataclass
class Answer:
    text: str
    contexts_used: list[tuple[str, list[str]]]
    prompt_fingerprint: str


@dataclass
class EvidenceItem:
    chunk_id: str
    path_display: str
    text: str


@dataclass
class PromptBlock:
    sub_query: str
    evidence: list[EvidenceItem] = field(default_factory=list)


def prompt_fingerprint(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def _render_blocks(question: str, blocks: list[PromptBlock]) -> str:
    parts = [f"Question: {question}", ""]
    any_evidence = any(block.evidence for block in blocks)
    if not any_evidence:
        parts.append(ABSTAIN_NOTE)
        parts.append("")
    for i, block in enumerate(blocks, start=1):
        parts.append(f"[Sub-query {i}] {block.sub_query}")
        if not block.evidence:
            parts.append(NO_EVIDENCE_MARKER)
        for item in block.evidence:
            parts.append(f"Path: {item.path_display}")
            parts.append(item.text)
        parts.append("")
    return "\n".join(parts).rstrip() + "\n"


def assemble_prompt(question: str, contexts, budget: int | None = None) -> str:
    """Build the deterministic evidence prompt.

    One block per sub-query, in order; each evidence item is a path header
    line followed by the pruned text. When the character budget is exceeded,
    evidence is dropped from the tail (last block first, newest evidence
    first); the question and sub-query headers are never truncated.
    """
    blocks = [
        PromptBlock(
            sub_query=ctx.sub_query,
            evidence=[EvidenceItem(p.chunk_id, p.path_display, p.text)
                      for p in ctx.pruned],
        )
        for ctx in contexts
    ]
    prompt = _render_blocks(question, blocks)
    if budget is None:
        return prompt
    while len(prompt) > budget:
        victim = None
        for block in reversed(blocks):
            if block.evidence:
                victim = block
                break
        if victim is None:
            break
        victim.evidence.pop()
        prompt = _render_blocks(question, blocks)
    return prompt


def generate_answer(question: str, contexts, client: CompletionClient,
                    templates: PromptTemplates, domain: str = "general",
                    budget: int | None = None, temperature: float = 0.0,
                    max_retries: int = 1) -> Answer:
    """Run the generator over the assembled prompt.

    Unlike the rewriter and pruner, a backend failure here is an error (after
    one retry) carrying the prompt fingerprint; there is no silent fallback
    at the final step.
    """
    if not contexts:
        raise ValueError("generate_answer requires at least one sub-query context")
    body = assemble_prompt(question, contexts, budget=budget)
    system, user = templates.answer.render(DOMAIN=domain, prompt=body)
    fingerprint = prompt_fingerprint(system + "\n" + user)
    last_exc: Exception | None = None
    for attempt in range(max_retries + 1):
        try:
            completion = client.complete(system, user, temperature=temperature)
            break
        except CompletionUnavailable as exc:
            raise CompletionError(f"generation backend unavailable: {exc}",
                                  prompt_fingerprint=fingerprint) from exc
        except Exception as exc:
            last_exc = exc
            if attempt < max_retries:
                time.sleep(0.2 * 2 ** attempt)
    else:
        raise CompletionError(f"generation failed: {last_exc}",
                              prompt_fingerprint=fingerprint) from last_exc
    contexts_used = [(ctx.sub_query, [p.chunk_id for p in ctx.pruned])
                     for ctx in contexts]
    return Answer(text=completion.strip(), contexts_used=contexts_used,
                  prompt_fingerprint=fingerprint)
