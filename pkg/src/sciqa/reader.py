"""Answer producers: a deterministic window-overlap baseline reader plus
clients for external extractive (start/end span) and generative readers.

The generative path is context-free by design: callers pass only the
question, and the client refuses a context outright.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

from . import _http
from .corpus import tokenize
from .errors import ProtocolError

log = logging.getLogger(__name__)

# Fixed question-stopword list for the baseline reader. Versioned so that
# published scores stay reproducible; bump the version on any edit.
STOPWORDS_VERSION = 1
STOPWORDS = frozenset(
    """
    a an the and or but if then of in on at to for from by with about as into
    is are was were be been being do does did
    what when where which who how this that these those
    """.split()
)
assert len(STOPWORDS) == 40

DEFAULT_WINDOW_TOKENS = 15
DEFAULT_TOP_K = 3


@dataclass
class AnswerSpan:
    """An extractive answer: text plus character offsets into its context."""

    text: str
    char_start: int
    char_end: int
    score: float

    def matches_context(self, context: str) -> bool:
        return (
            self.char_start < self.char_end
            and context[self.char_start : self.char_end] == self.text
        )

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "start": self.char_start,
            "end": self.char_end,
            "score": self.score,
        }


@dataclass
class GeneratedAnswer:
    """A context-free generated answer; empty text must be marked abstained."""

    text: str
    abstained: bool = False

    def to_dict(self) -> dict:
        return {"text": self.text, "abstained": self.abstained}


def baseline_extract(
    question: str,
    context: str,
    window_tokens: int = DEFAULT_WINDOW_TOKENS,
    top_k: int = DEFAULT_TOP_K,
) -> List[AnswerSpan]:
    """Score every token window of length <= window_tokens by question overlap.

    A window's score is the number of distinct window terms that appear among
    the question's non-stopword terms, divided by window_tokens. Candidates
    are ranked by descending score, then earlier start, then shorter span;
    a candidate overlapping an already-kept span is dropped. With no overlap
    anywhere, the earliest single-token window wins by the tie rules.
    """
    if window_tokens < 1:
        raise ValueError(f"window_tokens must be >= 1, got {window_tokens}")
    if top_k < 1:
        raise ValueError(f"top_k must be >= 1, got {top_k}")
    pieces = tokenize(context)
    if not pieces:
        raise ValueError("context has no tokens")
    content_terms = {term for term, _, _ in tokenize(question)} - STOPWORDS

    terms = [term for term, _, _ in pieces]
    offsets = [(start, end) for _, start, end in pieces]
    n = len(terms)

    # (negated score, char_start, char_end, first_token, last_token)
    candidates = []
    for i in range(n):
        matched = 0
        seen_counts: dict = {}
        top = min(i + window_tokens, n)
        for j in range(i, top):
            term = terms[j]
            if term in content_terms:
                prior = seen_counts.get(term, 0)
                if prior == 0:
                    matched += 1
                seen_counts[term] = prior + 1
            candidates.append(
                (-(matched / window_tokens), offsets[i][0], offsets[j][1], i, j)
            )
    candidates.sort()

    kept: List[AnswerSpan] = []
    kept_ranges: List[tuple] = []
    for neg_score, char_start, char_end, first, last in candidates:
        if any(first <= kl and kf <= last for kf, kl in kept_ranges):
            continue
        kept.append(
            AnswerSpan(
                text=context[char_start:char_end],
                char_start=char_start,
                char_end=char_end,
                score=-neg_score,
            )
        )
        kept_ranges.append((first, last))
        if len(kept) == top_k:
            break
    return kept


def answer_length(answer_text: str) -> int:
    """Token count of an answer under the corpus tokenizer."""
    return len(tokenize(answer_text))


class ExtractiveReaderClient:
    """Client for a remote start/end span reader.

    POST {endpoint}/extract {"question", "context", "top_k"}
      -> {"spans": [{"text", "start", "end", "score"}, ...]}

    Every returned span is re-sliced from the context before acceptance; a
    span whose offsets do not reproduce its text is a protocol error.
    """

    def __init__(self, endpoint: str, top_k: int = DEFAULT_TOP_K,
                 timeout: float = _http.DEFAULT_TIMEOUT,
                 attempts: int = _http.DEFAULT_ATTEMPTS):
        if not endpoint:
            raise ValueError("reader endpoint is not configured")
        self.url = endpoint.rstrip("/") + "/extract"
        self.top_k = top_k
        self.timeout = timeout
        self.attempts = attempts

    def answer(self, question: str, context: str) -> List[AnswerSpan]:
        payload = {"question": question, "context": context, "top_k": self.top_k}
        response = _http.post_json(self.url, payload, self.timeout, self.attempts)
        if response.status_code // 100 != 2:
            raise ProtocolError(
                f"{self.url}: status {response.status_code}: {response.text[:200]}"
            )
        body = _http.parse_json_body(response, self.url)
        raw_spans = body.get("spans")
        if not isinstance(raw_spans, list):
            raise ProtocolError(f"{self.url}: missing 'spans' list in response")
        spans = []
        for raw in raw_spans:
            try:
                span = AnswerSpan(
                    text=str(raw["text"]),
                    char_start=int(raw["start"]),
                    char_end=int(raw["end"]),
                    score=float(raw.get("score", 0.0)),
                )
            except (TypeError, KeyError, ValueError) as exc:
                raise ProtocolError(f"{self.url}: malformed span {raw!r}: {exc}") from exc
            if not span.matches_context(context):
                raise ProtocolError(
                    f"{self.url}: span {span.text!r} [{span.char_start}, {span.char_end}) "
                    "does not match the context slice"
                )
            spans.append(span)
        return spans


class GenerativeReaderClient:
    """Client for a remote closed-book generator.

    POST {endpoint}/generate {"question"} -> {"text"}. Empty text is an
    abstention, not an error.
    """

    def __init__(self, endpoint: str, timeout: float = _http.DEFAULT_TIMEOUT,
                 attempts: int = _http.DEFAULT_ATTEMPTS):
        if not endpoint:
            raise ValueError("reader endpoint is not configured")
        self.url = endpoint.rstrip("/") + "/generate"
        self.timeout = timeout
        self.attempts = attempts

    def answer(self, question: str, context: Optional[str] = None) -> GeneratedAnswer:
        if context is not None:
            raise ValueError("the generative reader is context-free; do not pass a context")
        response = _http.post_json(self.url, {"question": question}, self.timeout, self.attempts)
        if response.status_code // 100 != 2:
            raise ProtocolError(
                f"{self.url}: status {response.status_code}: {response.text[:200]}"
            )
        body = _http.parse_json_body(response, self.url)
        text = body.get("text")
        if text is None or not isinstance(text, str):
            raise ProtocolError(f"{self.url}: response lacks a 'text' string")
        if not text.strip():
            return GeneratedAnswer(text="", abstained=True)
        return GeneratedAnswer(text=text, abstained=False)
