import type { QueryResult } from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** POST /ask; the service does all filtering and scoring, we only display. */
export async function askQuestion(
  question: string,
  topN?: number,
  fetchImpl: FetchLike = fetch,
): Promise<QueryResult> {
  const body: Record<string, unknown> = { question };
  if (topN !== undefined) {
    body.top_n = topN;
  }
  const response = await fetchImpl("/ask", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(body),
  });
  if (!response.ok) {
    let message = `service error (status ${response.status})`;
    try {
      const payload = await response.json();
      if (payload && typeof payload.error === "string") {
        message = payload.error;
      }
    } catch {
      // non-JSON error body; keep the generic message
    }
    throw new ApiError(message, response.status);
  }
  return (await response.json()) as QueryResult;
}
