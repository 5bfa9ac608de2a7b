/** Thin fetch client for the /v1 API. Chunk ids contain '#', so every id
 * is URL-encoded before it enters a path. */

import type {
  ChunkPage,
  ChunkPayload,
  DocSummary,
  QueryResponse,
  TagEditResponse,
} from "./types.js";

export class ApiHttpError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public detail?: unknown,
  ) {
    super(message);
  }
}

export interface ClientConfig {
  baseUrl: string;
  apiToken?: string;
}

export class ApiClient {
  constructor(private config: ClientConfig) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.config.apiToken) {
      headers["X-API-Token"] = this.config.apiToken;
    }
    const resp = await fetch(this.config.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await resp.json().catch(() => ({}));
    if (!resp.ok) {
      const err = payload as { code?: string; message?: string; detail?: unknown };
      throw new ApiHttpError(
        resp.status,
        err.code ?? "error",
        err.message ?? resp.statusText,
        err.detail,
      );
    }
    return payload as T;
  }

  health(): Promise<Record<string, unknown>> {
    return this.request("GET", "/v1/health");
  }

  listDocs(): Promise<{ documents: DocSummary[] }> {
    return this.request("GET", "/v1/docs");
  }

  docChunks(docId: string, offset = 0, limit = 20): Promise<ChunkPage> {
    const id = encodeURIComponent(docId);
    return this.request("GET", `/v1/docs/${id}/chunks?offset=${offset}&limit=${limit}`);
  }

  chunk(chunkId: string): Promise<ChunkPayload> {
    return this.request("GET", `/v1/chunks/${encodeURIComponent(chunkId)}`);
  }

  query(question: string, k: number, debug = true, generate = false): Promise<QueryResponse> {
    return this.request("POST", "/v1/query", { question, k, debug, generate });
  }

  editTag(
    target: string,
    scope: "document" | "chunk",
    action: "inject" | "remove",
    tag: string,
    probeQuery?: string,
  ): Promise<TagEditResponse> {
    const kind = scope === "document" ? "docs" : "chunks";
    const path = `/v1/${kind}/${encodeURIComponent(target)}/tags`;
    const body = { tag, probe_query: probeQuery ?? null, actor: "console" };
    return this.request(action === "inject" ? "POST" : "DELETE", path, body);
  }

  editlog(): Promise<{ records: Record<string, unknown>[] }> {
    return this.request("GET", "/v1/editlog");
  }
}
