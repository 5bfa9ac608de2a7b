import { describe, expect, it } from "vitest";

import { renderDebugView } from "../src/render.js";
import type { QueryTrace } from "../src/types.js";

// A mocked /v1/query debug payload with full-precision values exactly as
// the server serializes them.
const TRACE: QueryTrace = {
  query: "container terminal throughput in 2023",
  k: 3,
  subqueries: [
    "container terminal throughput in 2023",
    "terminal capacity",
  ],
  stages: [
    {
      sub_query: "container terminal throughput in 2023",
      candidates: [
        {
          chunk_id: "harbor-logistics#0",
          path: "harbor logistics → terminal → throughput",
          tag_rank: 1,
          tag_l2: 1.2364177028389054,
          sparse_rank: 1,
          sparse_score: 2.93240178541566,
          semantic_rank: 1,
          semantic_cosine: 0.25199999999999995,
        },
        {
          chunk_id: "lumen-retail#0",
          path: "lumen retail → grocery → stores",
          tag_rank: 2,
          tag_l2: 1.4142135623730951,
          sparse_rank: null,
          sparse_score: null,
          semantic_rank: 2,
          semantic_cosine: 0.13253012048192772,
        },
      ],
      fused: [
        {
          chunk_id: "harbor-logistics#0",
          path: "harbor logistics → terminal → throughput",
          score: 0.016393442622950817,
          sources_ranked: 3,
        },
        {
          chunk_id: "lumen-retail#0",
          path: "lumen retail → grocery → stores",
          score: 0.008064516129032258,
          sources_ranked: 2,
        },
      ],
      pruned: [
        {
          chunk_id: "harbor-logistics#0",
          path: "harbor logistics → terminal → throughput",
          text: "Throughput grew to 2.4 million TEU in 2023.",
        },
      ],
    },
    {
      sub_query: "terminal capacity",
      candidates: [],
      fused: [],
      pruned: [],
    },
  ],
  answer: null,
};

describe("debug view rendering", () => {
  it("matches the snapshot for a full trace payload", () => {
    expect(renderDebugView(TRACE)).toMatchSnapshot();
  });

  it("renders every server rank and score verbatim, full precision", () => {
    const html = renderDebugView(TRACE);
    // Fusion scores: exactly the server strings, no rounding.
    expect(html).toContain("0.016393442622950817");
    expect(html).toContain("0.008064516129032258");
    // Per-source values of the first candidate.
    expect(html).toContain("1.2364177028389054");
    expect(html).toContain("0.25199999999999995");
    // Ranks appear as integers.
    expect(html).toMatch(/<td>1<\/td><td>1\.2364177028389054<\/td>/);
  });

  it("renders missing-source values as a dash, not a number", () => {
    const html = renderDebugView(TRACE);
    expect(html).toContain("<td>–</td><td>–</td>");
  });

  it("keeps sub-query order and shows the empty stage", () => {
    const html = renderDebugView(TRACE);
    const first = html.indexOf("[1] container terminal throughput in 2023");
    const second = html.indexOf("[2] terminal capacity");
    expect(first).toBeGreaterThan(-1);
    expect(second).toBeGreaterThan(first);
    expect(html).toContain("(no evidence survived)");
  });

  it("escapes markup in server text", () => {
    const trace: QueryTrace = {
      ...TRACE,
      stages: [
        {
          sub_query: "<script>alert(1)</script>",
          candidates: [],
          fused: [],
          pruned: [],
        },
      ],
    };
    const html = renderDebugView(trace);
    expect(html).not.toContain("<script>alert(1)</script>");
    expect(html).toContain("&lt;script&gt;");
  });
});
