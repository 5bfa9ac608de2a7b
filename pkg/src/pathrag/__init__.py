"""pathrag: hybrid retrieval with hierarchical tag paths.

Documents are segmented into chunks, each chunk annotated with a semantic
path (document-global master tags plus chunk-local paragraph tags), and
indexed three ways: path vectors, text vectors, and a BM25 inverted index.
Queries are rewritten into sub-queries, retrieved coarsely, re-ranked by
weighted reciprocal-rank fusion, pruned, and answered with evidence grouped
under the sub-query that found it. Paths are human-readable and editable,
so experts can inject or remove tags and watch retrieval distance and rank
shift immediately.
"""

from .config import EngineConfig, RetrievalConfig, load_config
from .corpus import Chunk, Document, QaRecord, load_corpus, load_qa, segment_document
from .embedding import (HashedEmbedder, RemoteEmbedder, embed_path, embed_text,
                        similarity)
from .evaluation import (BenchmarkReport, hit_rate_at_k, precision_at_k,
                         rouge_l, run_benchmark)
from .generation import (Answer, NullCompletionClient, RemoteCompletionClient,
                         ScriptedCompletionClient, assemble_prompt,
                         generate_answer, load_templates)
from .index import AugmentedChunk, HybridIndex, RankedHit, TagEditReport
from .pipeline import Engine, IngestReport, QueryDebugTrace, QueryResult
from .retrieval import (SubQueryContext, coarse_retrieve, prune_contexts,
                        rank_semantic, retrieve, rewrite_query, rrf_fuse)
from .tagging import (HeuristicTagger, LlmTagger, SemanticPath, build_path,
                      generate_master_tags, generate_paragraph_tags,
                      normalize_tags)

__version__ = "0.1.0"

__all__ = [
    "Answer", "AugmentedChunk", "BenchmarkReport", "Chunk", "Document",
    "Engine", "EngineConfig", "HashedEmbedder", "HeuristicTagger",
    "HybridIndex", "IngestReport", "LlmTagger", "NullCompletionClient",
    "QaRecord", "QueryDebugTrace", "QueryResult", "RankedHit",
    "RemoteCompletionClient", "RemoteEmbedder", "RetrievalConfig",
    "ScriptedCompletionClient", "SemanticPath", "SubQueryContext",
    "TagEditReport", "assemble_prompt", "build_path", "coarse_retrieve",
    "embed_path", "embed_text", "generate_answer", "generate_master_tags",
    "generate_paragraph_tags", "hit_rate_at_k", "load_config", "load_corpus",
    "load_qa", "load_templates", "normalize_tags", "precision_at_k",
    "prune_contexts", "rank_semantic", "retrieve", "rewrite_query",
    "rouge_l", "rrf_fuse", "run_benchmark", "segment_document", "similarity",
]
