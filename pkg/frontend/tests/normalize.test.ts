import { describe, expect, it } from "vitest";

import { normalizeTagPreview } from "../src/normalize.js";

describe("tag normalization preview (mirrors server rules)", () => {
  it("strips punctuation and quotes", () => {
    expect(normalizeTagPreview('"Q3-budget" (draft)')).toBe("Q3 budget draft");
  });

  it("collapses whitespace, preserves case", () => {
    expect(normalizeTagPreview("Universal   Banking")).toBe("Universal Banking");
  });

  it("caps at four words", () => {
    expect(normalizeTagPreview("a b c d e f")).toBe("a b c d");
  });

  it("returns null for empty results so submit stays disabled", () => {
    expect(normalizeTagPreview("")).toBeNull();
    expect(normalizeTagPreview("!!! ...")).toBeNull();
    expect(normalizeTagPreview("   ")).toBeNull();
  });

  it("keeps unicode letters and digits", () => {
    expect(normalizeTagPreview("café 2023")).toBe("café 2023");
  });
});
