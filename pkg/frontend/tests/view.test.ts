import { readFileSync } from "node:fs";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { buildResultCards, splitHighlights } from "../src/view.js";
import type { QueryResult } from "../src/types.js";

function fixture(name: string): QueryResult {
  const raw = readFileSync(join(__dirname, "fixtures", name), "utf-8");
  return JSON.parse(raw) as QueryResult;
}

describe("buildResultCards on recorded /ask fixtures", () => {
  it("produces one card per hit", () => {
    const result = fixture("ask_incubation.json");
    const cards = buildResultCards(result);
    expect(cards.length).toBe(result.hits.length);
    expect(cards.map((c) => c.articleId)).toEqual(result.hits.map((h) => h.article_id));
  });

  it("highlighted segments reproduce each span exactly", () => {
    const result = fixture("ask_incubation.json");
    for (const answers of result.answers) {
      const segments = splitHighlights(answers.context, answers.spans);
      const highlighted = segments.filter((s) => s.highlighted).map((s) => s.text);
      const expected = [...answers.spans]
        .sort((a, b) => a.start - b.start)
        .map((span) => answers.context.slice(span.start, span.end));
      expect(highlighted).toEqual(expected);
      for (const span of answers.spans) {
        expect(answers.context.slice(span.start, span.end)).toBe(span.text);
      }
    }
  });

  it("segments concatenate back to the full context", () => {
    const result = fixture("ask_incubation.json");
    for (const answers of result.answers) {
      const segments = splitHighlights(answers.context, answers.spans);
      expect(segments.map((s) => s.text).join("")).toBe(answers.context);
    }
  });

  it("renders zero cards for an empty-hit result", () => {
    const result = fixture("ask_no_hits.json");
    expect(result.hits.length).toBe(0);
    expect(buildResultCards(result)).toEqual([]);
    expect(result.diagnostics.length).toBeGreaterThan(0);
  });
});

describe("splitHighlights edge cases", () => {
  it("handles no spans", () => {
    expect(splitHighlights("plain text", [])).toEqual([
      { text: "plain text", highlighted: false },
    ]);
  });

  it("skips malformed or overlapping spans", () => {
    const context = "abcdefghij";
    const segments = splitHighlights(context, [
      { text: "cde", start: 2, end: 5, score: 1 },
      { text: "de", start: 3, end: 5, score: 0.5 }, // overlaps the first
      { text: "", start: 7, end: 7, score: 0.1 }, // empty
      { text: "ij", start: 8, end: 10, score: 0.2 },
    ]);
    expect(segments.map((s) => s.text).join("")).toBe(context);
    expect(segments.filter((s) => s.highlighted).map((s) => s.text)).toEqual(["cde", "ij"]);
  });

  it("handles a span covering the whole context", () => {
    const segments = splitHighlights("whole", [
      { text: "whole", start: 0, end: 5, score: 1 },
    ]);
    expect(segments).toEqual([{ text: "whole", highlighted: true }]);
  });
});
