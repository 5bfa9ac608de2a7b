import { describe, expect, it } from "vitest";

import { renderTagEditResult } from "../src/render.js";
import type { TagEditResponse } from "../src/types.js";

function editResponse(overrides: Partial<TagEditResponse> = {}): TagEditResponse {
  return {
    target: "arta-bank",
    scope: "document",
    tag: "diversified business model",
    action: "inject",
    noop: false,
    affected_chunk_ids: ["arta-bank#0", "arta-bank#1"],
    probe: {
      query: "diversified business model",
      before: { chunk_id: "arta-bank#0", distance: 1.2364177028389054, rank: 4 },
      after: { chunk_id: "arta-bank#0", distance: 0.9462112889741818, rank: 1 },
      distance_delta: -0.2902064138647235,
      rank_delta: -3,
    },
    ...overrides,
  };
}

describe("inject-tag flow rendering", () => {
  it("matches the snapshot for an improving injection", () => {
    expect(renderTagEditResult(editResponse())).toMatchSnapshot();
  });

  it("shows the server's before/after values verbatim", () => {
    const html = renderTagEditResult(editResponse());
    expect(html).toContain("1.2364177028389054");
    expect(html).toContain("0.9462112889741818");
    expect(html).toContain("-0.2902064138647235");
  });

  it("renders a negative delta as improved with its sign", () => {
    const html = renderTagEditResult(editResponse());
    expect(html).toContain('data-direction="improved"');
    expect(html).toContain("Δ distance: -0.2902064138647235 (improved)");
    expect(html).not.toContain("+-");
  });

  it("renders a positive delta as worsened with an explicit plus", () => {
    const resp = editResponse({ action: "remove" });
    resp.probe = {
      ...resp.probe!,
      before: { chunk_id: "arta-bank#0", distance: 0.9462112889741818, rank: 1 },
      after: { chunk_id: "arta-bank#0", distance: 1.2364177028389054, rank: 4 },
      distance_delta: 0.2902064138647235,
      rank_delta: 3,
    };
    const html = renderTagEditResult(resp);
    expect(html).toContain('data-direction="worsened"');
    expect(html).toContain("Δ distance: +0.2902064138647235 (worsened)");
  });

  it("renders a zero delta as unchanged", () => {
    const resp = editResponse();
    resp.probe = {
      ...resp.probe!,
      after: resp.probe!.before,
      distance_delta: 0,
      rank_delta: 0,
    };
    const html = renderTagEditResult(resp);
    expect(html).toContain('data-direction="unchanged"');
    expect(html).toContain("Δ distance: 0 (unchanged)");
  });

  it("shows a no-op notice for duplicate injection", () => {
    const resp = editResponse({ noop: true, affected_chunk_ids: [], probe: undefined });
    const html = renderTagEditResult(resp);
    expect(html).toContain('data-noop="true"');
    expect(html).toContain("No-op");
    expect(html).toContain("already present");
    expect(html).not.toContain("probe");
  });

  it("shows a not-present notice for removing an absent tag", () => {
    const resp = editResponse({ action: "remove", noop: true,
                                affected_chunk_ids: [], probe: undefined });
    const html = renderTagEditResult(resp);
    expect(html).toContain("was not present");
  });
});
