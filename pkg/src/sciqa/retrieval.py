"""Title ranking by cosine similarity over pluggable embedding providers.

The built-in provider is a deterministic TF-IDF embedder; a remote service
speaking the /embed protocol can stand in for it. Only article titles are
embedded for ranking.
"""

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Protocol, Sequence

import numpy as np

from . import _http
from .corpus import Article, TokenizedDoc, Vocabulary, tokenize
from .errors import DataError, ProviderError

log = logging.getLogger(__name__)


@dataclass
class RankedHit:
    article_id: str
    score: float
    rank: int  # 1-based

    def to_dict(self) -> dict:
        return {"article_id": self.article_id, "score": self.score, "rank": self.rank}


class EmbeddingProvider(Protocol):
    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        """Return one vector per text; all vectors share a dimension."""
        ...


class TfidfIndex:
    """Frozen tf-idf statistics: vocabulary order plus per-term idf.

    idf(t) = ln((1 + D) / (1 + df(t))) + 1, tf is the raw in-text count.
    """

    def __init__(self, terms: List[str], idf: np.ndarray):
        if len(terms) != len(idf):
            raise ValueError("terms and idf lengths differ")
        self.terms = list(terms)
        self.idf = np.asarray(idf, dtype=np.float64)
        self._term_to_index = {term: i for i, term in enumerate(self.terms)}

    @property
    def dim(self) -> int:
        return len(self.terms)

    @classmethod
    def fit(cls, docs: Sequence[TokenizedDoc], vocab: Vocabulary) -> "TfidfIndex":
        """Freeze idf statistics from a tokenized corpus.

        Empty documents still count toward D; they just contribute no df.
        """
        if not docs:
            raise ValueError("need at least one document to fit")
        n_docs = len(docs)
        df = np.zeros(len(vocab), dtype=np.int64)
        for doc in docs:
            for token in set(doc.tokens):
                df[token] += 1
        idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        return cls(terms=list(vocab.index_to_term), idf=idf)

    def embed(self, text: str) -> np.ndarray:
        """L2-normalized tf-idf vector; OOV terms ignored, all-OOV stays zero."""
        vec = np.zeros(self.dim, dtype=np.float64)
        for term, _, _ in tokenize(text):
            idx = self._term_to_index.get(term)
            if idx is not None:
                vec[idx] += self.idf[idx]
        norm = math.sqrt(float(np.dot(vec, vec)))
        if norm > 0.0:
            vec /= norm
        return vec

    def save(self, path) -> None:
        payload = {"vocab": self.terms, "idf": self.idf.tolist()}
        Path(path).write_text(json.dumps(payload), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "TfidfIndex":
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read tf-idf index {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed tf-idf index: {exc}") from exc
        return cls(terms=payload["vocab"], idf=np.asarray(payload["idf"], dtype=np.float64))


class TfidfProvider:
    """Deterministic built-in embedding provider backed by a TfidfIndex."""

    def __init__(self, index: TfidfIndex):
        self.index = index

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        return [self.index.embed(text) for text in texts]


class ExternalEmbeddingProvider:
    """Client for a remote embedding service.

    POST {endpoint}/embed {"texts": [...]} -> {"vectors": [[...], ...]}.
    The service is authoritative for the dimension; this client only checks
    that vectors are uniform, finite, and one per input text.
    """

    def __init__(self, endpoint: str, timeout: float = _http.DEFAULT_TIMEOUT,
                 attempts: int = _http.DEFAULT_ATTEMPTS):
        if not endpoint:
            raise ValueError("embedding endpoint is not configured")
        self.url = endpoint.rstrip("/") + "/embed"
        self.timeout = timeout
        self.attempts = attempts

    def embed(self, texts: Sequence[str]) -> List[np.ndarray]:
        response = _http.post_json(self.url, {"texts": list(texts)}, self.timeout, self.attempts)
        if response.status_code // 100 != 2:
            raise ProviderError(
                f"{self.url}: status {response.status_code}: {response.text[:200]}"
            )
        body = _http.parse_json_body(response, self.url)
        vectors = body.get("vectors")
        if not isinstance(vectors, list) or len(vectors) != len(texts):
            got = len(vectors) if isinstance(vectors, list) else type(vectors).__name__
            raise ProviderError(f"{self.url}: expected {len(texts)} vectors, got {got}")
        arrays = []
        dim = None
        for i, vector in enumerate(vectors):
            arr = np.asarray(vector, dtype=np.float64)
            if arr.ndim != 1 or arr.size == 0:
                raise ProviderError(f"{self.url}: vector {i} is not a flat non-empty list")
            if dim is None:
                dim = arr.size
            elif arr.size != dim:
                raise ProviderError(
                    f"{self.url}: ragged vectors (vector {i} has dim {arr.size}, expected {dim})"
                )
            if not np.all(np.isfinite(arr)):
                raise ProviderError(f"{self.url}: vector {i} has non-finite entries")
            arrays.append(arr)
        return arrays


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity; defined as 0 when either vector has zero norm."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    norm_a = math.sqrt(float(np.dot(a, a)))
    norm_b = math.sqrt(float(np.dot(b, b)))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return float(np.dot(a, b) / (norm_a * norm_b))


def rank_titles(
    query: str,
    articles: Sequence[Article],
    provider: EmbeddingProvider,
    n: int,
) -> List[RankedHit]:
    """Top-n articles by cosine similarity between query and title embeddings.

    Ordering is descending score, ties broken by ascending article id; ranks
    are contiguous from 1. Asking for more hits than articles returns all.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not articles:
        raise ValueError("articles list is empty")
    vectors = provider.embed([query] + [article.title for article in articles])
    query_vec = vectors[0]
    scored = [
        (article.id, cosine(query_vec, vec))
        for article, vec in zip(articles, vectors[1:])
    ]
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [
        RankedHit(article_id=article_id, score=score, rank=i + 1)
        for i, (article_id, score) in enumerate(scored[:n])
    ]
