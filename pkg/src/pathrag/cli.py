"""Command-line interface mirroring the HTTP API.

Subcommands: ingest, query, eval, tag inject|remove, serve. Exit codes:
0 ok, 1 usage error, 2 data error (corpus/index/config), 3 backend error
(embedder/LLM).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

import yaml

from .config import ConfigError, EngineConfig, apply_overrides, load_config
from .corpus import CorpusError
from .embedding import EmbeddingError, build_embedder
from .evaluation import METHODS, render_table, run_benchmark
from .generation import CompletionError
from .index import HybridIndex, HybridIndexError
from .pipeline import EmptyIndexError, Engine
from .tagging import TaggingError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_BACKEND = 3


def _parse_overrides(pairs: list[str]) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for pair in pairs:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, raw = pair.split("=", 1)
        overrides[key.strip()] = yaml.safe_load(raw)
    return overrides


def _load_engine_config(args: argparse.Namespace) -> EngineConfig:
    cfg = load_config(getattr(args, "config", None))
    overrides = _parse_overrides(getattr(args, "set", []) or [])
    if overrides:
        apply_overrides(cfg, overrides)
    return cfg


def _engine_with_index(args: argparse.Namespace, require_index: bool = True) -> Engine:
    cfg = _load_engine_config(args)
    index_dir = Path(args.index)
    embedder = build_embedder(cfg.embedder)
    if (index_dir / "header").exists():
        index = HybridIndex.load(index_dir, embedder, cfg.index)
    elif require_index:
        raise HybridIndexError(f"no index found at {index_dir}")
    else:
        index = None
    return Engine(cfg, embedder=embedder, index=index)


def _cmd_ingest(args: argparse.Namespace) -> int:
    engine = _engine_with_index(args, require_index=False)
    report = engine.ingest_path(args.corpus, args.schema)
    engine.index.persist(args.index)
    for doc in report.documents:
        flag = " (replaced)" if doc.replaced else ""
        print(f"{doc.doc_id}: {len(doc.chunk_ids)} chunks{flag}")
    print(f"ingested {len(report.documents)} documents, "
          f"{report.chunk_count} chunks in {report.seconds:.2f}s -> {args.index}")
    return EXIT_OK


def _cmd_query(args: argparse.Namespace) -> int:
    engine = _engine_with_index(args)
    result = engine.query(args.question, k=args.k, generate=args.generate,
                          debug=args.debug)
    if args.json:
        payload: dict[str, Any] = {
            "contexts": [{
                "sub_query": ctx.sub_query,
                "evidence": [{"chunk_id": p.chunk_id, "path": p.path_display,
                              "text": p.text} for p in ctx.pruned],
            } for ctx in result.contexts],
        }
        if result.answer:
            payload["answer"] = result.answer.text
            payload["prompt_fingerprint"] = result.answer.prompt_fingerprint
        if result.trace:
            payload["trace"] = result.trace.to_dict()
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False))
        return EXIT_OK
    for ctx in result.contexts:
        print(f"sub-query: {ctx.sub_query}")
        for p in ctx.pruned:
            print(f"  [{p.chunk_id}] {p.path_display}")
    if result.answer:
        print(f"answer: {result.answer.text}")
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_engine_config(args)
    report = run_benchmark(args.corpus, args.qa, args.method, cfg)
    if args.out:
        report.write(args.out)
        print(f"report written to {args.out}")
    print(render_table([report]))
    timings = report.timings
    print(f"index construction: {timings['index_construction_s']:.2f}s, "
          f"retrieval: {timings['retrieval_s']:.2f}s, "
          f"generation: {timings['generation_s']:.2f}s")
    return EXIT_OK


def _cmd_tag(args: argparse.Namespace) -> int:
    engine = _engine_with_index(args)
    if bool(args.doc) == bool(args.chunk):
        raise ConfigError("provide exactly one of --doc or --chunk")
    target = args.doc or args.chunk
    scope = "document" if args.doc else "chunk"
    result = engine.tag_edit(target, scope, args.tag, args.action,
                             probe_query=args.probe, actor="cli")
    engine.index.persist(args.index)
    if result["noop"]:
        print(f"no-op: tag {result['tag']!r} "
              f"{'already present' if args.action == 'inject' else 'not present'}")
    else:
        verb = "injected" if args.action == "inject" else "removed"
        print(f"{verb} tag {result['tag']!r} on {len(result['affected_chunk_ids'])} chunks")
    probe = result.get("probe")
    if probe:
        before, after = probe["before"], probe["after"]
        print(f"probe {probe['query']!r}: distance {before['distance']:.4f} -> "
              f"{after['distance']:.4f} (delta {probe['distance_delta']:+.4f}), "
              f"rank {before['rank']} -> {after['rank']}")
    return EXIT_OK


def _cmd_serve(args: argparse.Namespace) -> int:
    from .server import serve

    engine = _engine_with_index(args, require_index=False)
    if args.host:
        engine.config.server.host = args.host
    if args.port:
        engine.config.server.port = args.port
    serve(engine)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathrag",
        description="Hybrid retrieval engine with hierarchical tag paths")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="YAML or JSON config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="dotted config override, e.g. retrieval.k=3")

    p = sub.add_parser("ingest", help="segment, tag, embed, and index a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--index", required=True, help="index directory")
    p.add_argument("--schema", default="profiles")
    common(p)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("query", help="run the retrieval pipeline")
    p.add_argument("question")
    p.add_argument("--index", required=True)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--generate", action="store_true")
    p.add_argument("--debug", action="store_true")
    p.add_argument("--json", action="store_true")
    common(p)
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("eval", help="run the benchmark harness")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qa", required=True)
    p.add_argument("--method", choices=METHODS, default="pathrag")
    p.add_argument("--out", help="write the JSON report here")
    common(p)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("tag", help="inject or remove a path tag")
    p.add_argument("action", choices=["inject", "remove"])
    p.add_argument("--index", required=True)
    p.add_argument("--doc", help="document id (document scope)")
    p.add_argument("--chunk", help="chunk id (chunk scope)")
    p.add_argument("--tag", required=True)
    p.add_argument("--probe", help="probe query for before/after distances")
    common(p)
    p.set_defaults(func=_cmd_tag)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--index", required=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    common(p)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except (ConfigError, CorpusError, HybridIndexError, EmptyIndexError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (EmbeddingError, TaggingError, CompletionError) as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
