// Wire types mirroring the /ask response JSON.

export interface AnswerSpan {
  text: string;
  start: number;
  end: number;
  score: number;
}

export interface RankedHit {
  article_id: string;
  score: number;
  rank: number;
}

export interface HitAnswers {
  article_id: string;
  title: string;
  context: string;
  spans: AnswerSpan[];
}

export interface GeneratedAnswer {
  text: string;
  abstained: boolean;
}

export interface QueryResult {
  question: string;
  hits: RankedHit[];
  answers: HitAnswers[];
  generated: GeneratedAnswer | null;
  diagnostics: string[];
  timing_ms?: Record<string, number>;
}
