"""Topic-model filtering: collapsed-Gibbs LDA, fold-in inference,
Jensen-Shannon relevance, and the keyword / topic article filters.

The sampler is a sequential-scan collapsed Gibbs sampler so that runs are
bit-reproducible for a fixed seed. Relevance scores everywhere follow the
"higher is better, in [0, 1]" convention.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .corpus import Article, TokenizedDoc, Vocabulary, tokenize
from .errors import DataError

log = logging.getLogger(__name__)

RNG_NAME = "numpy-pcg64"
MODEL_MAGIC = b"LDAF1\n"

PHI_ROW_SUM_TOL = 1e-9
PROB_SUM_TOL = 1e-6


@dataclass
class TopicModel:
    """A fitted LDA model: K topic-word rows plus the fit parameters."""

    k: int
    vocab_size: int
    phi: np.ndarray  # K x V, rows are probability vectors
    alpha: float
    beta: float
    seed: int
    iterations: int
    rng_name: str = RNG_NAME
    vocab_hash: str = ""

    def validate(self) -> None:
        if self.k < 2:
            raise ValueError(f"topic count must be >= 2, got {self.k}")
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("alpha and beta must be positive")
        if self.phi.shape != (self.k, self.vocab_size):
            raise ValueError(f"phi shape {self.phi.shape} != ({self.k}, {self.vocab_size})")
        if np.any(self.phi < 0):
            raise ValueError("phi has negative entries")
        row_sums = self.phi.sum(axis=1)
        if np.any(np.abs(row_sums - 1.0) > PHI_ROW_SUM_TOL):
            raise ValueError("phi rows do not sum to 1")


@dataclass
class GibbsState:
    """Per-token topic assignments and the count tables they imply."""

    z: List[List[int]]
    n_dk: List[List[int]]
    n_kw: List[List[int]]
    n_k: List[int]

    def recount(self, docs: Sequence[TokenizedDoc]) -> "GibbsState":
        """Re-tally all counts from scratch out of z; used to audit the sampler."""
        k = len(self.n_k)
        vocab_size = len(self.n_kw[0])
        n_dk = [[0] * k for _ in docs]
        n_kw = [[0] * vocab_size for _ in range(k)]
        n_k = [0] * k
        for d, doc in enumerate(docs):
            for i, w in enumerate(doc.tokens):
                topic = self.z[d][i]
                n_dk[d][topic] += 1
                n_kw[topic][w] += 1
                n_k[topic] += 1
        return GibbsState(z=self.z, n_dk=n_dk, n_kw=n_kw, n_k=n_k)

    def counts_consistent(self, docs: Sequence[TokenizedDoc]) -> bool:
        fresh = self.recount(docs)
        return (
            fresh.n_dk == self.n_dk
            and fresh.n_kw == self.n_kw
            and fresh.n_k == self.n_k
        )


def vocabulary_hash(vocab: Vocabulary) -> str:
    joined = "\n".join(vocab.index_to_term).encode("utf-8")
    return hashlib.sha256(joined).hexdigest()


class GibbsSampler:
    """Sequential-scan collapsed Gibbs sampler for LDA.

    Each sweep walks documents and tokens in order, removing the token's own
    counts and resampling its topic from

        p(z = k) proportional to (n_dk + alpha) * (n_kw + beta) / (n_k + V*beta)

    Counts are plain Python ints; at desk scale that beats per-token numpy
    dispatch by a wide margin.
    """

    def __init__(
        self,
        docs: Sequence[TokenizedDoc],
        k: int,
        vocab_size: int,
        alpha: float,
        beta: float,
        seed: int,
    ):
        if k < 2:
            raise ValueError(f"topic count must be >= 2, got {k}")
        if alpha <= 0 or beta <= 0:
            raise ValueError("alpha and beta must be positive")
        for doc in docs:
            if len(doc.tokens) == 0:
                raise DataError(f"document {doc.article_id!r} is empty; LDA needs non-empty docs")
            if any(w < 0 or w >= vocab_size for w in doc.tokens):
                raise DataError(f"document {doc.article_id!r} has tokens outside the vocabulary")
        self.docs = list(docs)
        self.k = k
        self.vocab_size = vocab_size
        self.alpha = alpha
        self.beta = beta
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.sweeps_done = 0

        self.z: List[List[int]] = []
        self.n_dk = [[0] * k for _ in self.docs]
        self.n_kw = [[0] * vocab_size for _ in range(k)]
        self.n_k = [0] * k
        for d, doc in enumerate(self.docs):
            assignments = [int(t) for t in self.rng.integers(0, k, size=len(doc.tokens))]
            self.z.append(assignments)
            row = self.n_dk[d]
            for w, topic in zip(doc.tokens, assignments):
                row[topic] += 1
                self.n_kw[topic][w] += 1
                self.n_k[topic] += 1

    def sweep(self) -> None:
        """Resample every token's topic once, in document and token order."""
        k_total = self.k
        alpha = self.alpha
        beta = self.beta
        v_beta = self.vocab_size * beta
        n_kw = self.n_kw
        n_k = self.n_k
        rand = self.rng.random
        weights = [0.0] * k_total
        for d, doc in enumerate(self.docs):
            z_d = self.z[d]
            n_d = self.n_dk[d]
            for i, w in enumerate(doc.tokens):
                old = z_d[i]
                n_d[old] -= 1
                n_kw[old][w] -= 1
                n_k[old] -= 1
                total = 0.0
                for k in range(k_total):
                    weight = (n_d[k] + alpha) * (n_kw[k][w] + beta) / (n_k[k] + v_beta)
                    weights[k] = weight
                    total += weight
                target = rand() * total
                acc = 0.0
                new = k_total - 1
                for k in range(k_total):
                    acc += weights[k]
                    if target < acc:
                        new = k
                        break
                z_d[i] = new
                n_d[new] += 1
                n_kw[new][w] += 1
                n_k[new] += 1
        self.sweeps_done += 1

    def run(self, iterations: int) -> None:
        if iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {iterations}")
        for _ in range(iterations):
            self.sweep()

    def state(self) -> GibbsState:
        return GibbsState(z=self.z, n_dk=self.n_dk, n_kw=self.n_kw, n_k=self.n_k)

    def phi(self) -> np.ndarray:
        """Smoothed topic-word distributions from the current counts."""
        counts = np.asarray(self.n_kw, dtype=np.float64)
        totals = np.asarray(self.n_k, dtype=np.float64)
        return (counts + self.beta) / (totals + self.vocab_size * self.beta)[:, None]

    def doc_topics(self) -> np.ndarray:
        """Smoothed per-document topic mixtures from the current counts."""
        counts = np.asarray(self.n_dk, dtype=np.float64)
        lengths = counts.sum(axis=1)
        return (counts + self.alpha) / (lengths + self.k * self.alpha)[:, None]


def fit_lda(
    docs: Sequence[TokenizedDoc],
    vocab: Vocabulary,
    k: int,
    alpha: float,
    beta: float,
    iterations: int,
    seed: int,
) -> Tuple[TopicModel, GibbsSampler]:
    """Fit LDA by collapsed Gibbs sampling; deterministic for a fixed seed.

    Returns the model together with the finished sampler so callers can read
    the final per-document mixtures.
    """
    sampler = GibbsSampler(docs, k=k, vocab_size=len(vocab), alpha=alpha, beta=beta, seed=seed)
    sampler.run(iterations)
    model = TopicModel(
        k=k,
        vocab_size=len(vocab),
        phi=sampler.phi(),
        alpha=alpha,
        beta=beta,
        seed=seed,
        iterations=iterations,
        rng_name=RNG_NAME,
        vocab_hash=vocabulary_hash(vocab),
    )
    model.validate()
    return model, sampler


def infer_doc_topics(
    model: TopicModel, doc: TokenizedDoc, fold_iterations: int, seed: int
) -> np.ndarray:
    """Fold a document into a fitted model, holding phi fixed.

    Tokens outside the model vocabulary are dropped; if none survive this
    raises DataError. The returned theta is (n_dk + alpha) / (N + K*alpha).
    """
    if fold_iterations < 1:
        raise ValueError(f"fold_iterations must be >= 1, got {fold_iterations}")
    tokens = [w for w in doc.tokens if 0 <= w < model.vocab_size]
    if not tokens:
        raise DataError(f"document {doc.article_id!r}: all tokens out of vocabulary")
    rng = np.random.default_rng(seed)
    k_total = model.k
    alpha = model.alpha
    phi = model.phi
    z = [int(t) for t in rng.integers(0, k_total, size=len(tokens))]
    n = [0] * k_total
    for topic in z:
        n[topic] += 1
    weights = [0.0] * k_total
    rand = rng.random
    for _ in range(fold_iterations):
        for i, w in enumerate(tokens):
            old = z[i]
            n[old] -= 1
            total = 0.0
            column = phi[:, w]
            for k in range(k_total):
                weight = (n[k] + alpha) * column[k]
                weights[k] = weight
                total += weight
            target = rand() * total
            acc = 0.0
            new = k_total - 1
            for k in range(k_total):
                acc += weights[k]
                if target < acc:
                    new = k
                    break
            z[i] = new
            n[new] += 1
    counts = np.asarray(n, dtype=np.float64)
    theta = (counts + alpha) / (len(tokens) + k_total * alpha)
    return theta


def save_model(model: TopicModel, path) -> None:
    """Persist a model: magic, one-line JSON header, then row-major float64 phi."""
    header = {
        "K": model.k,
        "V": model.vocab_size,
        "alpha": model.alpha,
        "beta": model.beta,
        "seed": model.seed,
        "iterations": model.iterations,
        "rng": model.rng_name,
        "vocab_hash": model.vocab_hash,
    }
    with Path(path).open("wb") as handle:
        handle.write(MODEL_MAGIC)
        handle.write((json.dumps(header, sort_keys=True) + "\n").encode("utf-8"))
        handle.write(np.ascontiguousarray(model.phi, dtype="<f8").tobytes())


def load_model(path) -> TopicModel:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read model {path}: {exc}") from exc
    if not raw.startswith(MODEL_MAGIC):
        raise DataError(f"{path} is not a topic-model file (bad magic)")
    body = raw[len(MODEL_MAGIC):]
    newline = body.find(b"\n")
    if newline < 0:
        raise DataError(f"{path}: missing model header")
    try:
        header = json.loads(body[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"{path}: malformed model header: {exc}") from exc
    blob = body[newline + 1:]
    k, vocab_size = int(header["K"]), int(header["V"])
    expected = k * vocab_size * 8
    if len(blob) != expected:
        raise DataError(f"{path}: phi payload is {len(blob)} bytes, expected {expected}")
    phi = np.frombuffer(blob, dtype="<f8").reshape(k, vocab_size).copy()
    model = TopicModel(
        k=k,
        vocab_size=vocab_size,
        phi=phi,
        alpha=float(header["alpha"]),
        beta=float(header["beta"]),
        seed=int(header["seed"]),
        iterations=int(header["iterations"]),
        rng_name=str(header.get("rng", "")),
        vocab_hash=str(header.get("vocab_hash", "")),
    )
    model.validate()
    return model


def _check_probability_vector(name: str, vec: np.ndarray) -> None:
    if vec.ndim != 1:
        raise ValueError(f"{name} must be a 1-D probability vector")
    if np.any(vec < 0):
        raise ValueError(f"{name} has negative entries")
    total = float(vec.sum())
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ValueError(f"{name} sums to {total}, not 1")


def js_distance(p, q) -> float:
    """Jensen-Shannon distance between two probability vectors, log base 2.

    sqrt((KL(p||m) + KL(q||m)) / 2) with m = (p + q) / 2 and 0*log(0) := 0.
    Always in [0, 1]; 0 exactly when p == q.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {q.shape}")
    _check_probability_vector("p", p)
    _check_probability_vector("q", q)
    m = (p + q) / 2.0
    # Where p > 0, m >= p/2 > 0, so the ratio is well defined.
    with np.errstate(divide="ignore", invalid="ignore"):
        kl_p = np.where(p > 0, p * np.log2(np.where(p > 0, p / m, 1.0)), 0.0).sum()
        kl_q = np.where(q > 0, q * np.log2(np.where(q > 0, q / m, 1.0)), 0.0).sum()
    divergence = (kl_p + kl_q) / 2.0
    divergence = min(max(float(divergence), 0.0), 1.0)
    return float(np.sqrt(divergence))


@dataclass
class FilterDecision:
    article_id: str
    score: float
    retained: bool

    def to_dict(self) -> dict:
        return {"article_id": self.article_id, "score": self.score, "retained": self.retained}


def write_decisions(decisions: Sequence[FilterDecision], path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for decision in decisions:
            handle.write(json.dumps(decision.to_dict(), sort_keys=True) + "\n")


def keyword_filter(
    corpus: Sequence[Article], keywords: Sequence[str], mode: str = "any"
) -> List[FilterDecision]:
    """Retain articles whose text contains keyword token sequences.

    A keyword matches when its token sequence occurs contiguously in the
    tokenized title+abstract+paragraphs, so "RNA virus" does not match
    "rna viruses". Score is matched-keyword-count / keyword-count; "any"
    retains on one match, "all" requires every keyword.
    """
    if not keywords:
        raise ValueError("keyword list is empty; pass no filter instead of an empty one")
    if mode not in ("any", "all"):
        raise ValueError(f"unknown keyword match mode {mode!r}")
    needles = []
    for keyword in keywords:
        terms = [term for term, _, _ in tokenize(keyword)]
        if not terms:
            raise ValueError(f"keyword {keyword!r} contains no tokens")
        needles.append(terms)

    decisions = []
    for article in corpus:
        haystack = [term for term, _, _ in tokenize(article.full_text())]
        matched = sum(1 for needle in needles if _contains_sequence(haystack, needle))
        score = matched / len(needles)
        retained = matched == len(needles) if mode == "all" else matched > 0
        decisions.append(FilterDecision(article_id=article.id, score=score, retained=retained))
    return decisions


def _contains_sequence(haystack: List[str], needle: List[str]) -> bool:
    n = len(needle)
    if n == 0 or n > len(haystack):
        return False
    first = needle[0]
    for i in range(len(haystack) - n + 1):
        if haystack[i] == first and haystack[i : i + n] == needle:
            return True
    return False


def topic_filter(
    doc_thetas: Dict[str, np.ndarray],
    query_theta: np.ndarray,
    threshold: Optional[float] = None,
    top_m: Optional[int] = None,
) -> List[FilterDecision]:
    """Score articles by topic closeness to the query and retain a subset.

    Score is 1 - js_distance(theta_doc, theta_query). Exactly one rule must
    be given: a score threshold, or the m best scores with boundary ties
    broken by ascending article id. Decisions come back in ascending id
    order.
    """
    if (threshold is None) == (top_m is None):
        raise ValueError("give exactly one of threshold= or top_m=")
    scored = [
        (article_id, 1.0 - js_distance(theta, query_theta))
        for article_id, theta in sorted(doc_thetas.items())
    ]
    if threshold is not None:
        retained_ids = {article_id for article_id, score in scored if score >= threshold}
    else:
        if top_m < 0:
            raise ValueError(f"top_m must be >= 0, got {top_m}")
        ordered = sorted(scored, key=lambda pair: (-pair[1], pair[0]))
        retained_ids = {article_id for article_id, _ in ordered[:top_m]}
    return [
        FilterDecision(article_id=article_id, score=score, retained=article_id in retained_ids)
        for article_id, score in scored
    ]
