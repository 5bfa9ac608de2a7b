/** Pure view functions: server payload in, HTML string out.
 *
 * Invariant: the console never computes or reformats a score. Every rank,
 * distance, and fused score is rendered with num() below, which prints the
 * server's JSON value verbatim, so what the expert reads is exactly what the
 * engine reported. The snapshot tests pin this.
 */

import type {
  ApiErrorBody,
  ChunkPage,
  QueryTrace,
  TagEditResponse,
} from "./types.js";

export function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Verbatim numeric rendering: no rounding, no padding. */
export function num(value: number | null): string {
  return value === null ? "–" : String(value);
}

export function renderError(status: number, err: ApiErrorBody): string {
  const hint =
    status === 409
      ? `<p class="hint">The index is empty. Ingest documents first (POST /v1/ingest or the CLI), then retry.</p>`
      : "";
  return `<div class="error-banner" data-status="${status}">
  <strong>${status} ${esc(err.code)}</strong> ${esc(err.message)}${hint}
</div>`;
}

function tagChips(tags: string[], kind: "master" | "paragraph"): string {
  if (tags.length === 0) {
    return `<span class="chip chip-empty">(none)</span>`;
  }
  return tags
    .map((t) => `<span class="chip chip-${kind}" data-tag="${esc(t)}">${esc(t)}</span>`)
    .join("");
}

/** Document path tree: master chips once per document, paragraph chips per
 * chunk, with pagination state for long documents. */
export function renderDocPaths(page: ChunkPage): string {
  const masterTags = page.chunks[0]?.path.master ?? [];
  const pages = Math.max(1, Math.ceil(page.total / page.limit));
  const current = Math.floor(page.offset / page.limit) + 1;
  const rows = page.chunks
    .map(
      (chunk) => `  <div class="chunk-row" data-chunk-id="${esc(chunk.chunk_id)}">
    <span class="chunk-id">${esc(chunk.chunk_id)}</span>
    <span class="tag-group">${tagChips(chunk.path.paragraph, "paragraph")}</span>
    <button class="edit-chunk" data-chunk-id="${esc(chunk.chunk_id)}">edit tags</button>
  </div>`,
    )
    .join("\n");
  return `<section class="doc-paths" data-doc-id="${esc(page.doc_id)}">
  <h2>${esc(page.doc_id)}</h2>
  <div class="master-tags"><h3>master tags</h3>${tagChips(masterTags, "master")}
    <button class="edit-doc" data-doc-id="${esc(page.doc_id)}">edit tags</button>
  </div>
  <h3>paragraph tags (${page.total} chunks, page ${current}/${pages})</h3>
${rows}
  <nav class="pager" data-offset="${page.offset}" data-limit="${page.limit}" data-total="${page.total}">
    <button class="pager-prev" ${page.offset === 0 ? "disabled" : ""}>prev</button>
    <button class="pager-next" ${page.offset + page.limit >= page.total ? "disabled" : ""}>next</button>
  </nav>
</section>`;
}

function candidateRows(stage: QueryTrace["stages"][number]): string {
  return stage.candidates
    .map(
      (c) => `    <tr class="candidate" data-chunk-id="${esc(c.chunk_id)}">
      <td>${esc(c.chunk_id)}</td>
      <td>${num(c.tag_rank)}</td><td>${num(c.tag_l2)}</td>
      <td>${num(c.semantic_rank)}</td><td>${num(c.semantic_cosine)}</td>
      <td>${num(c.sparse_rank)}</td><td>${num(c.sparse_score)}</td>
      <td class="path">${esc(c.path)}</td>
    </tr>`,
    )
    .join("\n");
}

/** Full debug view: sub-queries, per-source candidate ranks, fused top-k
 * with the fusion scores, and pruned survivors. All values verbatim. */
export function renderDebugView(trace: QueryTrace): string {
  const stages = trace.stages
    .map((stage, i) => {
      const fused = stage.fused
        .map(
          (f) => `    <li data-chunk-id="${esc(f.chunk_id)}">
      <span class="score">${num(f.score)}</span>
      <span class="sources">${f.sources_ranked} source${f.sources_ranked === 1 ? "" : "s"}</span>
      ${esc(f.chunk_id)} <span class="path">${esc(f.path)}</span>
    </li>`,
        )
        .join("\n");
      const pruned = stage.pruned
        .map(
          (p) => `    <li data-chunk-id="${esc(p.chunk_id)}">
      <span class="path">${esc(p.path)}</span>
      <blockquote>${esc(p.text)}</blockquote>
    </li>`,
        )
        .join("\n");
      return `<section class="stage" data-stage="${i}">
  <h3>[${i + 1}] ${esc(stage.sub_query)}</h3>
  <table class="candidates">
    <thead><tr><th>chunk</th><th>tag rank</th><th>L2</th><th>sem rank</th>
      <th>cosine</th><th>sparse rank</th><th>BM25</th><th>path</th></tr></thead>
    <tbody>
${candidateRows(stage)}
    </tbody>
  </table>
  <h4>fused top-k (weighted RRF)</h4>
  <ol class="fused">
${fused}
  </ol>
  <h4>pruned survivors</h4>
  <ol class="pruned">
${pruned || "    <li class=\"empty\">(no evidence survived)</li>"}
  </ol>
</section>`;
    })
    .join("\n");
  const answer = trace.answer === null
    ? ""
    : `<div class="answer"><h3>answer</h3><p>${esc(trace.answer)}</p></div>`;
  return `<div class="debug-view" data-k="${trace.k}">
<h2>${esc(trace.query)}</h2>
<p class="subqueries">sub-queries: ${trace.subqueries.map((s) => `<code>${esc(s)}</code>`).join(" ")}</p>
${stages}
${answer}
</div>`;
}

/** Before/after comparison for a tag edit with probe readings. The delta and
 * its direction come straight from the server response. */
export function renderTagEditResult(resp: TagEditResponse): string {
  const headline = resp.noop
    ? `<p class="noop">No-op: tag <code>${esc(resp.tag)}</code> ${
        resp.action === "inject" ? "is already present" : "was not present"
      }; the index is unchanged.</p>`
    : `<p class="applied">${resp.action === "inject" ? "Injected" : "Removed"} ` +
      `<code>${esc(resp.tag)}</code> on ${resp.affected_chunk_ids.length} chunk(s).</p>`;
  let probe = "";
  if (resp.probe) {
    const d = resp.probe.distance_delta;
    const direction = d < 0 ? "improved" : d > 0 ? "worsened" : "unchanged";
    const sign = d > 0 ? "+" : "";
    probe = `<table class="probe" data-direction="${direction}">
  <thead><tr><th></th><th>distance (L2)</th><th>rank</th><th>chunk</th></tr></thead>
  <tbody>
    <tr class="before"><th>before</th><td>${num(resp.probe.before.distance)}</td>
      <td>${num(resp.probe.before.rank)}</td><td>${esc(resp.probe.before.chunk_id)}</td></tr>
    <tr class="after"><th>after</th><td>${num(resp.probe.after.distance)}</td>
      <td>${num(resp.probe.after.rank)}</td><td>${esc(resp.probe.after.chunk_id)}</td></tr>
  </tbody>
</table>
<p class="delta delta-${direction}">Δ distance: ${sign}${num(d)} (${direction})</p>`;
  }
  return `<div class="tag-edit-result" data-noop="${resp.noop}">
${headline}
${probe}
</div>`;
}

export function renderDocList(docs: { doc_id: string; chunk_count: number; master_tags: string[] }[]): string {
  const rows = docs
    .map(
      (d) => `  <li data-doc-id="${esc(d.doc_id)}">
    <a href="#" class="open-doc" data-doc-id="${esc(d.doc_id)}">${esc(d.doc_id)}</a>
    <span class="count">${d.chunk_count} chunks</span>
    ${tagChips(d.master_tags, "master")}
  </li>`,
    )
    .join("\n");
  return `<ul class="doc-list">\n${rows}\n</ul>`;
}
