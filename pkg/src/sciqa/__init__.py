"""Retrieval-augmented question answering over scientific-article corpora.

Two retrieval pipelines (keyword filter + cosine title ranking, and LDA
topic filtering with Jensen-Shannon relevance), extractive and generative
readers behind one contract, and a SQuAD-style F1/EM evaluation harness.
"""

__version__ = "0.1.0"

from .corpus import (
    Article,
    QAExample,
    TokenizedDoc,
    Vocabulary,
    build_tokenized_corpus,
    load_corpus,
    load_qa_dataset,
    merge_qa_with_corpus,
    tokenize,
)
from .config import PipelineConfig, load_config
from .errors import (
    DataError,
    ExternalServiceError,
    ProtocolError,
    ProviderError,
    QaError,
    TransportError,
)
from .evaluation import (
    EvalReport,
    evaluate,
    exact_match,
    length_histogram,
    load_predictions,
    normalize_answer,
    save_predictions,
    token_f1,
)
from .pipeline import IndexBundle, QueryResult, answer_question, build_index, load_bundle, run_eval
from .reader import AnswerSpan, GeneratedAnswer, answer_length, baseline_extract
from .retrieval import RankedHit, TfidfIndex, cosine, rank_titles
from .topics import (
    FilterDecision,
    GibbsSampler,
    TopicModel,
    fit_lda,
    infer_doc_topics,
    js_distance,
    keyword_filter,
    topic_filter,
)

__all__ = [
    "__version__",
    "Article",
    "QAExample",
    "TokenizedDoc",
    "Vocabulary",
    "build_tokenized_corpus",
    "load_corpus",
    "load_qa_dataset",
    "merge_qa_with_corpus",
    "tokenize",
    "PipelineConfig",
    "load_config",
    "QaError",
    "DataError",
    "ExternalServiceError",
    "TransportError",
    "ProtocolError",
    "ProviderError",
    "EvalReport",
    "evaluate",
    "exact_match",
    "length_histogram",
    "load_predictions",
    "normalize_answer",
    "save_predictions",
    "token_f1",
    "IndexBundle",
    "QueryResult",
    "answer_question",
    "build_index",
    "load_bundle",
    "run_eval",
    "AnswerSpan",
    "GeneratedAnswer",
    "answer_length",
    "baseline_extract",
    "RankedHit",
    "TfidfIndex",
    "cosine",
    "rank_titles",
    "FilterDecision",
    "GibbsSampler",
    "TopicModel",
    "fit_lda",
    "infer_doc_topics",
    "js_distance",
    "keyword_filter",
    "topic_filter",
]
