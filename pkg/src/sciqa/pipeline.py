"""End-to-end orchestration: index building, question answering over the
two retrieval pipelines, and dataset evaluation runs.

An index bundle is a self-contained directory:

    manifest.json    config, seeds, corpus hash, diagnostics
    corpus.jsonl     verbatim copy of the source corpus
    vocab.json       vocabulary terms in index order
    tfidf.json       frozen tf-idf statistics
    model.lda        fitted topic model (lda-filter pipelines only)
    doc_topics.json  per-article topic mixtures (lda-filter only)

Nothing in a bundle carries a timestamp, so rebuilding from identical
inputs reproduces it byte for byte.
"""

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from .config import PipelineConfig
from .corpus import (
    Article,
    QAExample,
    TokenizedDoc,
    Vocabulary,
    build_tokenized_corpus,
    load_corpus,
    load_qa_dataset,
    merge_qa_with_corpus,
    tokenize_with_vocab,
)
from .errors import DataError
from .evaluation import EvalReport, evaluate
from .reader import (
    AnswerSpan,
    ExtractiveReaderClient,
    GeneratedAnswer,
    GenerativeReaderClient,
    baseline_extract,
)
from .retrieval import (
    ExternalEmbeddingProvider,
    RankedHit,
    TfidfIndex,
    TfidfProvider,
    rank_titles,
)
from .topics import (
    TopicModel,
    fit_lda,
    infer_doc_topics,
    keyword_filter,
    load_model,
    save_model,
    topic_filter,
)

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
CORPUS_NAME = "corpus.jsonl"
VOCAB_NAME = "vocab.json"
TFIDF_NAME = "tfidf.json"
MODEL_NAME = "model.lda"
DOC_TOPICS_NAME = "doc_topics.json"
LOCK_NAME = ".lock"
MANIFEST_FORMAT = 1


@dataclass
class IndexBundle:
    root: Path
    manifest: dict
    articles: List[Article]
    docs: List[TokenizedDoc]
    vocab: Vocabulary
    tfidf: TfidfIndex
    topic_model: Optional[TopicModel] = None
    doc_topics: Optional[Dict[str, np.ndarray]] = None

    def article(self, article_id: str) -> Article:
        return self._by_id[article_id]

    def __post_init__(self):
        self._by_id = {article.id: article for article in self.articles}

    @property
    def config(self) -> PipelineConfig:
        return PipelineConfig.from_dict(self.manifest["config"])


@dataclass
class HitAnswers:
    """Extractive answers for one ranked article, with their context."""

    article_id: str
    title: str
    context: str
    spans: List[AnswerSpan]

    def to_dict(self) -> dict:
        return {
            "article_id": self.article_id,
            "title": self.title,
            "context": self.context,
            "spans": [span.to_dict() for span in self.spans],
        }


@dataclass
class QueryResult:
    question: str
    hits: List[RankedHit]
    answers: List[HitAnswers]
    generated: Optional[GeneratedAnswer] = None
    diagnostics: List[str] = field(default_factory=list)
    timing_ms: Dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timing: bool = True) -> dict:
        payload = {
            "question": self.question,
            "hits": [hit.to_dict() for hit in self.hits],
            "answers": [answers.to_dict() for answers in self.answers],
            "generated": self.generated.to_dict() if self.generated else None,
            "diagnostics": list(self.diagnostics),
        }
        if include_timing:
            payload["timing_ms"] = dict(self.timing_ms)
        return payload


class _StageTimer:
    def __init__(self):
        self.timing_ms: Dict[str, float] = {}

    def stage(self, name: str):
        timer = self

        class _Ctx:
            def __enter__(self):
                self._start = time.perf_counter()

            def __exit__(self, *exc):
                timer.timing_ms[name] = (time.perf_counter() - self._start) * 1000.0
                return False

        return _Ctx()


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open("rb") as handle:
        for chunk in iter(lambda: handle.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def build_index(corpus_path, config: PipelineConfig, out_dir) -> IndexBundle:
    """Build a bundle directory from a corpus file; exclusive via a lock file.

    Deterministic given identical inputs and config (seeds included), so two
    builds from the same corpus produce identical bundles.
    """
    config.validate()
    corpus_path = Path(corpus_path)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    lock_path = out_dir / LOCK_NAME
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise DataError(f"{out_dir}: another build holds the lock file {LOCK_NAME}")
    try:
        os.close(lock_fd)
        return _build_index_locked(corpus_path, config, out_dir)
    finally:
        lock_path.unlink(missing_ok=True)


def _build_index_locked(corpus_path: Path, config: PipelineConfig, out_dir: Path) -> IndexBundle:
    articles, stats = load_corpus(corpus_path)
    if not articles:
        raise DataError(f"{corpus_path}: corpus produced no articles")
    raw = corpus_path.read_bytes()
    (out_dir / CORPUS_NAME).write_bytes(raw)

    docs, vocab = build_tokenized_corpus(articles)
    (out_dir / VOCAB_NAME).write_text(json.dumps(vocab.index_to_term), encoding="utf-8")

    tfidf = TfidfIndex.fit(docs, vocab)
    tfidf.save(out_dir / TFIDF_NAME)

    topic_model = None
    doc_topics: Optional[Dict[str, np.ndarray]] = None
    excluded: List[str] = []
    if config.pipeline == "lda-filter":
        eligible = [doc for doc in docs if len(doc) >= config.lda.min_tokens]
        excluded = [doc.article_id for doc in docs if len(doc) < config.lda.min_tokens]
        if excluded:
            log.warning(
                "%d articles under %d tokens excluded from the topic fit: %s",
                len(excluded), config.lda.min_tokens, ", ".join(excluded[:10]),
            )
        if not eligible:
            raise DataError(
                f"no article reaches lda.min_tokens={config.lda.min_tokens}; cannot fit topics"
            )
        topic_model, sampler = fit_lda(
            eligible,
            vocab,
            k=config.lda.topics,
            alpha=config.lda.effective_alpha,
            beta=config.lda.beta,
            iterations=config.lda.iterations,
            seed=config.lda.seed,
        )
        save_model(topic_model, out_dir / MODEL_NAME)
        thetas = sampler.doc_topics()
        doc_topics = {doc.article_id: thetas[i] for i, doc in enumerate(eligible)}
        serializable = {doc_id: theta.tolist() for doc_id, theta in doc_topics.items()}
        (out_dir / DOC_TOPICS_NAME).write_text(
            json.dumps(serializable, sort_keys=True), encoding="utf-8"
        )

    manifest = {
        "format": MANIFEST_FORMAT,
        "config": config.to_dict(),
        "corpus_sha256": hashlib.sha256(raw).hexdigest(),
        "articles": len(articles),
        "skipped_records": stats.skipped,
        "duplicate_ids": stats.duplicates,
        "vocab_size": len(vocab),
        "lda_excluded": excluded,
    }
    (out_dir / MANIFEST_NAME).write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return IndexBundle(
        root=out_dir,
        manifest=manifest,
        articles=articles,
        docs=docs,
        vocab=vocab,
        tfidf=tfidf,
        topic_model=topic_model,
        doc_topics=doc_topics,
    )


def load_bundle(bundle_dir) -> IndexBundle:
    """Load a bundle directory, re-tokenizing the corpus against the stored
    vocabulary as an integrity check."""
    root = Path(bundle_dir)
    manifest_path = root / MANIFEST_NAME
    if not manifest_path.is_file():
        raise DataError(f"{root}: not an index bundle (missing {MANIFEST_NAME})")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise DataError(f"{manifest_path}: malformed manifest: {exc}") from exc

    corpus_path = root / CORPUS_NAME
    articles, _ = load_corpus(corpus_path)
    recorded = manifest.get("corpus_sha256")
    if recorded and recorded != _sha256_file(corpus_path):
        raise DataError(f"{corpus_path}: contents do not match the manifest hash")

    vocab = Vocabulary(json.loads((root / VOCAB_NAME).read_text(encoding="utf-8")))
    docs = [
        tokenize_with_vocab(article.id, article.full_text(), vocab)
        for article in articles
    ]
    tfidf = TfidfIndex.load(root / TFIDF_NAME)

    topic_model = None
    doc_topics = None
    model_path = root / MODEL_NAME
    if model_path.is_file():
        topic_model = load_model(model_path)
        raw_topics = json.loads((root / DOC_TOPICS_NAME).read_text(encoding="utf-8"))
        doc_topics = {
            doc_id: np.asarray(theta, dtype=np.float64) for doc_id, theta in raw_topics.items()
        }
    return IndexBundle(
        root=root,
        manifest=manifest,
        articles=articles,
        docs=docs,
        vocab=vocab,
        tfidf=tfidf,
        topic_model=topic_model,
        doc_topics=doc_topics,
    )


def make_provider(bundle: IndexBundle, config: PipelineConfig):
    if config.provider.kind == "external":
        return ExternalEmbeddingProvider(
            config.provider.endpoint,
            timeout=config.provider.timeout,
            attempts=config.provider.attempts,
        )
    return TfidfProvider(bundle.tfidf)


def make_extractive_reader(config: PipelineConfig) -> Callable[[str, str], List[AnswerSpan]]:
    if config.reader.kind == "baseline":
        def read(question: str, context: str) -> List[AnswerSpan]:
            return baseline_extract(
                question,
                context,
                window_tokens=config.reader.window_tokens,
                top_k=config.reader.top_k,
            )
        return read
    if config.reader.kind == "external-extractive":
        client = ExtractiveReaderClient(
            config.reader.endpoint,
            top_k=config.reader.top_k,
            timeout=config.reader.timeout,
            attempts=config.reader.attempts,
        )
        return client.answer
    raise ValueError(f"{config.reader.kind!r} is not an extractive reader")


def _read_hits(
    bundle: IndexBundle,
    config: PipelineConfig,
    question: str,
    hits: List[RankedHit],
    diagnostics: List[str],
) -> List[HitAnswers]:
    reader = make_extractive_reader(config)
    contexts = []
    for hit in hits:
        article = bundle.article(hit.article_id)
        contexts.append((article, article.full_text()))

    def read_one(pair) -> List[AnswerSpan]:
        article, context = pair
        if not context.strip():
            return []
        try:
            spans = reader(question, context)
        except ValueError:
            # a context with no tokens cannot be read
            return []
        return sorted(spans, key=lambda span: -span.score)

    if config.reader.kind == "external-extractive" and len(contexts) > 1:
        with ThreadPoolExecutor(max_workers=config.reader.concurrency) as pool:
            span_lists = list(pool.map(read_one, contexts))
    else:
        span_lists = [read_one(pair) for pair in contexts]

    answers = []
    for (article, context), spans in zip(contexts, span_lists):
        if not spans:
            diagnostics.append(f"article {article.id}: no readable answer")
        answers.append(
            HitAnswers(article_id=article.id, title=article.title, context=context, spans=spans)
        )
    return answers


def answer_question(
    bundle: IndexBundle,
    config: PipelineConfig,
    question: str,
    top_n: Optional[int] = None,
) -> QueryResult:
    """Run the configured pipeline for one question.

    Filtering that eliminates every article yields an empty-hit result with
    a diagnostic rather than an error. The generative path skips retrieval
    entirely.
    """
    config.validate()
    if not question or not question.strip():
        raise ValueError("question is empty")
    n = top_n if top_n is not None else config.top_n
    if n < 1:
        raise ValueError(f"top_n must be >= 1, got {n}")
    timer = _StageTimer()
    diagnostics: List[str] = []

    if config.reader.kind == "external-generative":
        client = GenerativeReaderClient(
            config.reader.endpoint,
            timeout=config.reader.timeout,
            attempts=config.reader.attempts,
        )
        with timer.stage("generate"):
            generated = client.answer(question)
        if generated.abstained:
            diagnostics.append("generator abstained")
        return QueryResult(
            question=question,
            hits=[],
            answers=[],
            generated=generated,
            diagnostics=diagnostics,
            timing_ms=timer.timing_ms,
        )

    if config.pipeline == "keyword-cosine":
        hits = _keyword_cosine_hits(bundle, config, question, n, diagnostics, timer)
    else:
        hits = _lda_filter_hits(bundle, config, question, n, diagnostics, timer)

    if not hits:
        if not any("eliminated" in d or "no in-vocabulary" in d for d in diagnostics):
            diagnostics.append("filter eliminated all articles")
        return QueryResult(
            question=question,
            hits=[],
            answers=[],
            diagnostics=diagnostics,
            timing_ms=timer.timing_ms,
        )

    with timer.stage("read"):
        answers = _read_hits(bundle, config, question, hits, diagnostics)
    return QueryResult(
        question=question,
        hits=hits,
        answers=answers,
        diagnostics=diagnostics,
        timing_ms=timer.timing_ms,
    )


def _keyword_cosine_hits(
    bundle: IndexBundle,
    config: PipelineConfig,
    question: str,
    n: int,
    diagnostics: List[str],
    timer: _StageTimer,
) -> List[RankedHit]:
    with timer.stage("filter"):
        decisions = keyword_filter(bundle.articles, config.keywords, mode=config.keyword_mode)
        retained_ids = {d.article_id for d in decisions if d.retained}
        retained = [article for article in bundle.articles if article.id in retained_ids]
    if not retained:
        diagnostics.append("filter eliminated all articles")
        return []
    with timer.stage("rank"):
        provider = make_provider(bundle, config)
        return rank_titles(question, retained, provider, n)


def _lda_filter_hits(
    bundle: IndexBundle,
    config: PipelineConfig,
    question: str,
    n: int,
    diagnostics: List[str],
    timer: _StageTimer,
) -> List[RankedHit]:
    if bundle.topic_model is None or bundle.doc_topics is None:
        raise DataError("bundle has no topic model; rebuild with an lda-filter config")
    with timer.stage("filter"):
        query_doc = tokenize_with_vocab("query", question, bundle.vocab, drop_oov=True)
        if not query_doc.tokens:
            diagnostics.append("query has no in-vocabulary tokens")
            return []
        query_theta = infer_doc_topics(
            bundle.topic_model,
            query_doc,
            fold_iterations=config.lda.fold_iterations,
            seed=config.lda.seed,
        )
        if config.lda.rule == "threshold":
            decisions = topic_filter(
                bundle.doc_topics, query_theta, threshold=config.lda.threshold
            )
        else:
            decisions = topic_filter(bundle.doc_topics, query_theta, top_m=config.lda.top_m)
        scored = [(d.article_id, d.score) for d in decisions if d.retained]

        # Articles too short for the topic fit fall back to keyword matching
        # when keywords are configured; otherwise they are only reported.
        short_ids = list(bundle.manifest.get("lda_excluded", []))
        if short_ids:
            if config.keywords:
                short_articles = [bundle.article(a) for a in short_ids]
                for decision in keyword_filter(
                    short_articles, config.keywords, mode=config.keyword_mode
                ):
                    if decision.retained:
                        scored.append((decision.article_id, decision.score))
            else:
                diagnostics.append(
                    "articles below min_tokens not scored by the topic filter: "
                    + ", ".join(short_ids)
                )
    if not scored:
        diagnostics.append("filter eliminated all articles")
        return []
    scored.sort(key=lambda pair: (-pair[1], pair[0]))
    return [
        RankedHit(article_id=article_id, score=score, rank=i + 1)
        for i, (article_id, score) in enumerate(scored[:n])
    ]


def run_eval(
    bundle: IndexBundle,
    config: PipelineConfig,
    dataset_path,
    mode: str = "rc",
    dataset_name: Optional[str] = None,
    system_name: Optional[str] = None,
) -> EvalReport:
    """Evaluate the configured reader on a QA dataset.

    "rc" (reading comprehension) hands each example its own context, which
    is what the reported scores measure; "pipeline" retrieves a context via
    answer_question and scores the top answer.
    """
    if mode not in ("rc", "pipeline"):
        raise ValueError(f"mode must be 'rc' or 'pipeline', got {mode!r}")
    config.validate()
    dataset_path = Path(dataset_path)
    examples, _ = load_qa_dataset(dataset_path)
    if not examples:
        raise DataError(f"{dataset_path}: empty dataset")
    examples, dropped = merge_qa_with_corpus(examples, bundle.articles)
    if dropped:
        log.warning("%d examples referenced articles missing from the corpus", dropped)
    if not examples:
        raise DataError(f"{dataset_path}: empty dataset after corpus merge")

    if mode == "rc":
        predictions = _rc_predictions(config, examples)
    else:
        predictions = _pipeline_predictions(bundle, config, examples)

    name = dataset_name or dataset_path.stem
    system = system_name or (
        config.reader.kind if mode == "rc" else f"{config.pipeline}+{config.reader.kind}"
    )
    return evaluate(predictions, examples, dataset_name=name, system_name=system)


def _rc_predictions(config: PipelineConfig, examples: List[QAExample]) -> Dict[str, str]:
    if config.reader.kind == "external-generative":
        client = GenerativeReaderClient(
            config.reader.endpoint,
            timeout=config.reader.timeout,
            attempts=config.reader.attempts,
        )
        return {ex.id: client.answer(ex.question).text for ex in examples}

    reader = make_extractive_reader(config)

    def predict(example: QAExample) -> str:
        if not example.context:
            return ""
        try:
            spans = reader(example.question, example.context)
        except ValueError:
            return ""
        if not spans:
            return ""
        return max(spans, key=lambda span: span.score).text

    if config.reader.kind == "external-extractive" and len(examples) > 1:
        with ThreadPoolExecutor(max_workers=config.reader.concurrency) as pool:
            texts = list(pool.map(predict, examples))
        return {ex.id: text for ex, text in zip(examples, texts)}
    return {ex.id: predict(ex) for ex in examples}


def _pipeline_predictions(
    bundle: IndexBundle, config: PipelineConfig, examples: List[QAExample]
) -> Dict[str, str]:
    predictions = {}
    for example in examples:
        result = answer_question(bundle, config, example.question)
        if result.generated is not None:
            predictions[example.id] = result.generated.text
        elif result.answers and result.answers[0].spans:
            predictions[example.id] = result.answers[0].spans[0].text
        else:
            predictions[example.id] = ""
    return predictions
