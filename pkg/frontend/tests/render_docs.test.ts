import { describe, expect, it } from "vitest";

import { renderDocList, renderDocPaths, renderError } from "../src/render.js";
import type { ChunkPage, ChunkPayload } from "../src/types.js";

function chunk(docId: string, ordinal: number, paragraph: string[]): ChunkPayload {
  return {
    chunk_id: `${docId}#${ordinal}`,
    doc_id: docId,
    ordinal,
    char_span: [ordinal * 100, ordinal * 100 + 100],
    text: `chunk ${ordinal} text`,
    path: {
      master: ["Arta Banking Group", "universal banking"],
      paragraph,
      display: ["Arta Banking Group", "universal banking", ...paragraph].join(" → "),
    },
  };
}

describe("document path tree", () => {
  it("groups master and paragraph tags into separate chip groups", () => {
    const page: ChunkPage = {
      doc_id: "arta-bank",
      total: 2,
      offset: 0,
      limit: 20,
      chunks: [chunk("arta-bank", 0, ["lending", "branches"]),
               chunk("arta-bank", 1, ["credit quality"])],
    };
    const html = renderDocPaths(page);
    // 2 master chips + 3 paragraph chips = the 5 tags of this document.
    expect(html.match(/chip-master/g)).toHaveLength(2);
    expect(html.match(/chip-paragraph/g)).toHaveLength(3);
    expect(html).toContain('data-tag="Arta Banking Group"');
    expect(html).toContain('data-tag="credit quality"');
    expect(html).toMatchSnapshot();
  });

  it("paginates a 100-chunk document", () => {
    const page: ChunkPage = {
      doc_id: "big-doc",
      total: 100,
      offset: 40,
      limit: 20,
      chunks: Array.from({ length: 20 }, (_, i) => chunk("big-doc", 40 + i, ["p"])),
    };
    const html = renderDocPaths(page);
    expect(html).toContain("page 3/5");
    expect(html).toContain('data-total="100"');
    expect(html).not.toContain('class="pager-prev" disabled');
    const first: ChunkPage = { ...page, offset: 0,
      chunks: page.chunks.slice(0, 20) };
    expect(renderDocPaths(first)).toContain('<button class="pager-prev" disabled>');
    const last: ChunkPage = { ...page, offset: 80 };
    expect(renderDocPaths(last)).toContain('<button class="pager-next" disabled>');
  });

  it("renders edit affordances per scope", () => {
    const page: ChunkPage = {
      doc_id: "arta-bank", total: 1, offset: 0, limit: 20,
      chunks: [chunk("arta-bank", 0, ["lending"])],
    };
    const html = renderDocPaths(page);
    expect(html).toContain('class="edit-doc" data-doc-id="arta-bank"');
    expect(html).toContain('class="edit-chunk" data-chunk-id="arta-bank#0"');
  });
});

describe("doc list and errors", () => {
  it("lists documents with chunk counts and master chips", () => {
    const html = renderDocList([
      { doc_id: "arta-bank", chunk_count: 2, master_tags: ["banking"] },
      { doc_id: "kite-telecom", chunk_count: 3, master_tags: ["telecom", "fiber"] },
    ]);
    expect(html).toContain("arta-bank");
    expect(html).toContain("2 chunks");
    expect(html.match(/chip-master/g)).toHaveLength(3);
  });

  it("renders a stale-doc error inline without crashing", () => {
    const html = renderError(404, {
      code: "unknown_document",
      message: "unknown document: ghost",
    });
    expect(html).toContain('data-status="404"');
    expect(html).toContain("unknown_document");
    expect(html).toContain("unknown document: ghost");
  });

  it("renders the empty-index 409 with an ingest-first hint", () => {
    const html = renderError(409, {
      code: "empty_index",
      message: "the index is empty; ingest documents first",
    });
    expect(html).toContain("409 empty_index");
    expect(html).toContain("Ingest documents first");
  });
});
