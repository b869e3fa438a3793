import type { AnswerSpan, QueryResult } from "./types.js";

// Pure view-model builders; no DOM and no scoring logic of their own.

export interface Segment {
  text: string;
  highlighted: boolean;
}

export interface ResultCard {
  articleId: string;
  title: string;
  score: number;
  rank: number;
  context: string;
  segments: Segment[];
  spanTexts: string[];
}

/**
 * Split a context into plain and highlighted segments so that every
 * highlighted segment is exactly context.slice(start, end) for its span.
 * Spans are applied in start order; a span overlapping an earlier one is
 * skipped rather than double-highlighted.
 */
export function splitHighlights(context: string, spans: AnswerSpan[]): Segment[] {
  const ordered = [...spans].sort((a, b) => a.start - b.start || a.end - b.end);
  const segments: Segment[] = [];
  let cursor = 0;
  for (const span of ordered) {
    if (span.start < cursor || span.start >= span.end || span.end > context.length) {
      continue;
    }
    if (span.start > cursor) {
      segments.push({ text: context.slice(cursor, span.start), highlighted: false });
    }
    segments.push({ text: context.slice(span.start, span.end), highlighted: true });
    cursor = span.end;
  }
  if (cursor < context.length) {
    segments.push({ text: context.slice(cursor), highlighted: false });
  }
  return segments;
}

/** One card per ranked hit, joined with its answers by article id. */
export function buildResultCards(result: QueryResult): ResultCard[] {
  const byId = new Map(result.answers.map((a) => [a.article_id, a]));
  return result.hits.map((hit) => {
    const answers = byId.get(hit.article_id);
    const context = answers?.context ?? "";
    const spans = answers?.spans ?? [];
    return {
      articleId: hit.article_id,
      title: answers?.title ?? hit.article_id,
      score: hit.score,
      rank: hit.rank,
      context,
      segments: splitHighlights(context, spans),
      spanTexts: spans.map((span) => span.text),
    };
  });
}
