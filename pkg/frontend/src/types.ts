/** Wire types for the /v1 API. Field names match the server exactly. */

export interface DocSummary {
  doc_id: string;
  chunk_count: number;
  master_tags: string[];
}

export interface ChunkPath {
  master: string[];
  paragraph: string[];
  display: string;
}

export interface ChunkPayload {
  chunk_id: string;
  doc_id: string;
  ordinal: number;
  char_span: [number, number];
  text: string;
  path: ChunkPath;
}

export interface ChunkPage {
  doc_id: string;
  total: number;
  offset: number;
  limit: number;
  chunks: ChunkPayload[];
}

export interface TraceCandidate {
  chunk_id: string;
  path: string;
  tag_rank: number | null;
  tag_l2: number | null;
  sparse_rank: number | null;
  sparse_score: number | null;
  semantic_rank: number | null;
  semantic_cosine: number | null;
}

export interface TraceFused {
  chunk_id: string;
  path: string;
  score: number;
  sources_ranked: number;
}

export interface TracePruned {
  chunk_id: string;
  path: string;
  text: string;
}

export interface TraceStage {
  sub_query: string;
  candidates: TraceCandidate[];
  fused: TraceFused[];
  pruned: TracePruned[];
}

export interface QueryTrace {
  query: string;
  k: number;
  subqueries: string[];
  stages: TraceStage[];
  answer: string | null;
}

export interface QueryResponse {
  question: string;
  contexts: { sub_query: string; evidence: TracePruned[] }[];
  trace?: QueryTrace;
  answer?: { text: string; prompt_fingerprint: string };
}

export interface ProbeReading {
  chunk_id: string;
  distance: number;
  rank: number;
}

export interface TagEditProbe {
  query: string;
  before: ProbeReading;
  after: ProbeReading;
  distance_delta: number;
  rank_delta: number;
}

export interface TagEditResponse {
  target: string;
  scope: string;
  tag: string;
  action: string;
  noop: boolean;
  affected_chunk_ids: string[];
  probe?: TagEditProbe;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}
