import type { QueryResult } from "./types.js";

export interface HistoryEntry {
  question: string;
  result: QueryResult;
}

/**
 * Session state: append-only history, a single in-flight request, and the
 * error banner text. A failed request leaves history untouched.
 */
export class SessionState {
  readonly history: HistoryEntry[] = [];
  error: string | null = null;
  pending = false;

  constructor(private readonly ask: (question: string) => Promise<QueryResult>) {}

  canSubmit(question: string): boolean {
    return !this.pending && question.trim().length > 0;
  }

  async submit(question: string): Promise<QueryResult | null> {
    if (!this.canSubmit(question)) {
      return null;
    }
    this.pending = true;
    this.error = null;
    try {
      const result = await this.ask(question);
      this.history.push({ question, result });
      return result;
    } catch (err) {
      this.error = err instanceof Error ? err.message : String(err);
      return null;
    } finally {
      this.pending = false;
    }
  }
}
