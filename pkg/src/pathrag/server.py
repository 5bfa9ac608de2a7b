"""HTTP API over the engine, for the curation UI and programmatic clients.

All state lives in the engine's hybrid index; request handling is
concurrent, with index mutations serialized by the index's writer lock.
Retrieval-only and no-debug modes work without any LLM credentials.

Errors are returned as ``{code, message, detail}``. Status codes: 400
malformed input or invalid tag, 404 unknown target, 409 empty index, 422
schema violation, 502 generation backend failure, 503 embedder/tagger
backend unavailable.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from fastapi import Depends, FastAPI, Header, HTTPException, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .corpus import CorpusError, Document
from .embedding import EmbeddingError
from .generation import CompletionError
from .index import (CHUNK_SCOPE, DOCUMENT_SCOPE, HybridIndexError,
                    UnknownChunkError, UnknownDocumentError)
from .pipeline import EmptyIndexError, Engine
from .tagging import TaggingError

logger = logging.getLogger(__name__)


class DocumentIn(BaseModel):
    doc_id: str
    text: str
    title: str = ""
    metadata: dict[str, str] = Field(default_factory=dict)


class IngestRequest(BaseModel):
    documents: list[DocumentIn] | None = None
    corpus_path: str | None = None
    corpus_schema: str = "profiles"


class QueryRequest(BaseModel):
    question: str
    k: int | None = None
    debug: bool = False
    generate: bool = False


class TagEditRequest(BaseModel):
    tag: str
    probe_query: str | None = None
    actor: str = "api"


def _error(status: int, code: str, message: str, detail: Any = None) -> HTTPException:
    return HTTPException(status_code=status,
                         detail={"code": code, "message": message, "detail": detail})


def _chunk_payload(item) -> dict[str, Any]:
    return {
        "chunk_id": item.chunk.chunk_id,
        "doc_id": item.chunk.doc_id,
        "ordinal": item.chunk.ordinal,
        "char_span": list(item.chunk.char_span),
        "text": item.chunk.text,
        "path": {
            "master": list(item.path.master),
            "paragraph": list(item.path.paragraph),
            "display": item.path.display(),
        },
    }


def create_app(engine: Engine) -> FastAPI:
    app = FastAPI(title="pathrag", version="0.1.0")
    token = engine.config.server.api_token

    def require_token(x_api_token: str | None = Header(default=None)) -> None:
        if token and x_api_token != token:
            raise _error(401, "unauthorized", "missing or invalid API token")

    auth = [Depends(require_token)]

    @app.exception_handler(RequestValidationError)
    async def validation_handler(request: Request, exc: RequestValidationError):
        errors = exc.errors()
        malformed = any(e.get("type") == "json_invalid" for e in errors)
        status = 400 if malformed else 422
        code = "malformed" if malformed else "schema_violation"
        return JSONResponse(status_code=status, content={
            "code": code, "message": "invalid request body",
            "detail": [{k: str(v) for k, v in e.items() if k != "input"}
                       for e in errors],
        })

    @app.exception_handler(HTTPException)
    async def http_handler(request: Request, exc: HTTPException):
        detail = exc.detail
        if not isinstance(detail, dict) or "code" not in detail:
            detail = {"code": "error", "message": str(detail), "detail": None}
        return JSONResponse(status_code=exc.status_code, content=detail)

    @app.get("/v1/health")
    def health() -> dict[str, Any]:
        stats = engine.index.stats()
        return {"status": "ok", **stats}

    @app.post("/v1/ingest", dependencies=auth)
    def ingest(req: IngestRequest) -> dict[str, Any]:
        if (req.documents is None) == (req.corpus_path is None):
            raise _error(400, "malformed",
                         "provide exactly one of documents or corpus_path")
        try:
            if req.documents is not None:
                docs = [Document(doc_id=d.doc_id, text=d.text, title=d.title,
                                 metadata=d.metadata) for d in req.documents]
                report = engine.ingest_documents(docs)
            else:
                report = engine.ingest_path(req.corpus_path, req.corpus_schema)
        except CorpusError as exc:
            raise _error(422, "schema_violation", str(exc))
        except (EmbeddingError, TaggingError) as exc:
            raise _error(503, "backend_unavailable", str(exc))
        engine.index.log_event("ingest", actor="api",
                               doc_ids=report.doc_ids,
                               chunk_count=report.chunk_count)
        return {
            "documents": [{"doc_id": d.doc_id, "chunk_ids": d.chunk_ids,
                           "replaced": d.replaced} for d in report.documents],
            "chunk_count": report.chunk_count,
            "seconds": report.seconds,
        }

    @app.post("/v1/query", dependencies=auth)
    def query(req: QueryRequest) -> dict[str, Any]:
        if not req.question.strip():
            raise _error(400, "malformed", "question must be non-empty")
        try:
            result = engine.query(req.question, k=req.k, generate=req.generate,
                                  debug=req.debug)
        except EmptyIndexError as exc:
            raise _error(409, "empty_index", str(exc))
        except CompletionError as exc:
            raise _error(502, "generation_failed", str(exc),
                         detail={"prompt_fingerprint": exc.prompt_fingerprint})
        except EmbeddingError as exc:
            raise _error(503, "backend_unavailable", str(exc))
        payload: dict[str, Any] = {
            "question": req.question,
            "contexts": [{
                "sub_query": ctx.sub_query,
                "evidence": [{"chunk_id": p.chunk_id, "text": p.text,
                              "path": p.path_display} for p in ctx.pruned],
            } for ctx in result.contexts],
        }
        if result.answer is not None:
            payload["answer"] = {
                "text": result.answer.text,
                "contexts_used": [
                    {"sub_query": sq, "chunk_ids": cids}
                    for sq, cids in result.answer.contexts_used],
                "prompt_fingerprint": result.answer.prompt_fingerprint,
            }
        if result.trace is not None:
            payload["trace"] = result.trace.to_dict()
        return payload

    @app.get("/v1/docs", dependencies=auth)
    def list_docs() -> dict[str, Any]:
        docs = []
        for doc_id in engine.index.doc_ids():
            chunks = engine.index.chunks_of(doc_id)
            docs.append({
                "doc_id": doc_id,
                "chunk_count": len(chunks),
                "master_tags": list(chunks[0].path.master) if chunks else [],
            })
        return {"documents": docs}

    @app.get("/v1/docs/{doc_id}/chunks", dependencies=auth)
    def doc_chunks(doc_id: str, offset: int = 0, limit: int = 50) -> dict[str, Any]:
        try:
            chunks = engine.index.chunks_of(doc_id)
        except UnknownDocumentError as exc:
            raise _error(404, "unknown_document", str(exc))
        window = chunks[offset:offset + limit]
        return {
            "doc_id": doc_id,
            "total": len(chunks),
            "offset": offset,
            "limit": limit,
            "chunks": [_chunk_payload(c) for c in window],
        }

    @app.get("/v1/chunks/{chunk_id}", dependencies=auth)
    def chunk_detail(chunk_id: str) -> dict[str, Any]:
        try:
            return _chunk_payload(engine.index.get_chunk(chunk_id))
        except UnknownChunkError as exc:
            raise _error(404, "unknown_chunk", str(exc))

    def _tag_edit(target: str, scope: str, action: str,
                  req: TagEditRequest) -> dict[str, Any]:
        try:
            return engine.tag_edit(target, scope, req.tag, action,
                                   probe_query=req.probe_query, actor=req.actor)
        except (UnknownDocumentError, UnknownChunkError) as exc:
            raise _error(404, "unknown_target", str(exc))
        except ValueError as exc:
            raise _error(400, "invalid_tag", str(exc))
        except EmbeddingError as exc:
            raise _error(503, "backend_unavailable", str(exc))
        except HybridIndexError as exc:
            raise _error(409, "edit_failed", str(exc))

    @app.post("/v1/docs/{doc_id}/tags", dependencies=auth)
    def inject_doc_tag(doc_id: str, req: TagEditRequest) -> dict[str, Any]:
        return _tag_edit(doc_id, DOCUMENT_SCOPE, "inject", req)

    @app.delete("/v1/docs/{doc_id}/tags", dependencies=auth)
    def remove_doc_tag(doc_id: str, req: TagEditRequest) -> dict[str, Any]:
        return _tag_edit(doc_id, DOCUMENT_SCOPE, "remove", req)

    @app.post("/v1/chunks/{chunk_id}/tags", dependencies=auth)
    def inject_chunk_tag(chunk_id: str, req: TagEditRequest) -> dict[str, Any]:
        return _tag_edit(chunk_id, CHUNK_SCOPE, "inject", req)

    @app.delete("/v1/chunks/{chunk_id}/tags", dependencies=auth)
    def remove_chunk_tag(chunk_id: str, req: TagEditRequest) -> dict[str, Any]:
        return _tag_edit(chunk_id, CHUNK_SCOPE, "remove", req)

    @app.get("/v1/editlog", dependencies=auth)
    def editlog() -> dict[str, Any]:
        return {"records": engine.index.edit_log}

    static_dir = engine.config.server.static_dir
    if static_dir and Path(static_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    return app


def serve(engine: Engine) -> None:
    """Run the API with uvicorn (blocking)."""
    import uvicorn

    app = create_app(engine)
    uvicorn.run(app, host=engine.config.server.host,
                port=engine.config.server.port, log_level="info")
