"""Corpus and QA-dataset ingestion, tokenization, and vocabulary building.

File formats are JSON Lines, one UTF-8 object per line:

  corpus:  {"id": str, "title": str, "abstract": str,
            "paragraphs": [str], "meta": {str: str}}
  qa set:  {"id": str, "question": str, "context": str|null,
            "article_id": str|null, "answers": [str]}

"paragraphs" and "meta" are optional in the corpus schema.
"""

import json
import logging
from dataclasses import dataclass, field
from itertools import groupby
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from .errors import DataError

log = logging.getLogger(__name__)

CORPUS_FORMATS = ("jsonl",)


@dataclass
class Article:
    id: str
    title: str = ""
    abstract: str = ""
    paragraphs: List[str] = field(default_factory=list)
    source_meta: Dict[str, str] = field(default_factory=dict)

    def full_text(self) -> str:
        """Title, abstract, and paragraphs joined into one text pool."""
        parts = [self.title, self.abstract, *self.paragraphs]
        return "\n".join(p for p in parts if p)


@dataclass
class QAExample:
    id: str
    question: str
    gold_answers: List[str]
    context: Optional[str] = None
    article_id: Optional[str] = None


@dataclass
class LoadStats:
    """Diagnostics from a JSONL load: records skipped and duplicate ids."""

    skipped: int = 0
    duplicates: int = 0


class Vocabulary:
    """Bijective term <-> index map with contiguous indices in [0, V)."""

    def __init__(self, terms: Optional[List[str]] = None):
        self.index_to_term: List[str] = []
        self.term_to_index: Dict[str, int] = {}
        for term in terms or []:
            self.add(term)

    def add(self, term: str) -> int:
        idx = self.term_to_index.get(term)
        if idx is None:
            idx = len(self.index_to_term)
            self.term_to_index[term] = idx
            self.index_to_term.append(term)
        return idx

    def index(self, term: str) -> int:
        return self.term_to_index[term]

    def term(self, index: int) -> str:
        return self.index_to_term[index]

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_index

    def __len__(self) -> int:
        return len(self.index_to_term)


@dataclass
class TokenizedDoc:
    article_id: str
    tokens: List[int]
    char_offsets: List[Tuple[int, int]]

    def __len__(self) -> int:
        return len(self.tokens)


def tokenize(text: str) -> List[Tuple[str, int, int]]:
    """Split text into lowercased maximal alphanumeric runs with offsets.

    Any character that is not Unicode-alphanumeric separates tokens, so
    "COVID-19" yields ("covid", 0, 5) and ("19", 6, 8). Offsets index the
    original string, before lowercasing.
    """
    out = []
    for is_word, run in groupby(enumerate(text), key=lambda pair: pair[1].isalnum()):
        if not is_word:
            continue
        positions = [i for i, _ in run]
        start, end = positions[0], positions[-1] + 1
        out.append((text[start:end].lower(), start, end))
    return out


def _iter_jsonl(path: Path):
    try:
        handle = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    with handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            yield lineno, line


def _parse_article(obj) -> Article:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    art_id = obj.get("id")
    if not isinstance(art_id, str) or not art_id:
        raise ValueError("missing or invalid 'id'")
    title = obj.get("title") or ""
    abstract = obj.get("abstract") or ""
    if not isinstance(title, str) or not isinstance(abstract, str):
        raise ValueError("'title'/'abstract' must be strings")
    if not title and not abstract:
        raise ValueError("title and abstract are both empty")
    paragraphs = obj.get("paragraphs") or []
    if not isinstance(paragraphs, list) or any(not isinstance(p, str) for p in paragraphs):
        raise ValueError("'paragraphs' must be a list of strings")
    meta = obj.get("meta") or {}
    if not isinstance(meta, dict):
        raise ValueError("'meta' must be an object")
    return Article(
        id=art_id,
        title=title,
        abstract=abstract,
        paragraphs=list(paragraphs),
        source_meta={str(k): str(v) for k, v in meta.items()},
    )


def load_corpus(path, fmt: str = "jsonl") -> Tuple[List[Article], LoadStats]:
    """Load a corpus file into Articles, skipping malformed records.

    Duplicate ids keep the first occurrence. Returns the articles in file
    order plus the skip/duplicate counts.
    """
    if fmt not in CORPUS_FORMATS:
        raise ValueError(f"unknown corpus format {fmt!r}; expected one of {CORPUS_FORMATS}")
    path = Path(path)
    articles: List[Article] = []
    seen = set()
    stats = LoadStats()
    for lineno, line in _iter_jsonl(path):
        try:
            article = _parse_article(json.loads(line))
        except (json.JSONDecodeError, ValueError) as exc:
            stats.skipped += 1
            log.warning("%s:%d: skipping malformed record: %s", path, lineno, exc)
            continue
        if article.id in seen:
            stats.duplicates += 1
            log.warning("%s:%d: duplicate article id %r, keeping first", path, lineno, article.id)
            continue
        seen.add(article.id)
        articles.append(article)
    return articles, stats


def _parse_qa_example(obj) -> QAExample:
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    ex_id = obj.get("id")
    question = obj.get("question")
    answers = obj.get("answers")
    if not isinstance(ex_id, str) or not ex_id:
        raise ValueError("missing or invalid 'id'")
    if not isinstance(question, str) or not question:
        raise ValueError("missing or invalid 'question'")
    if not isinstance(answers, list) or not answers or any(not isinstance(a, str) for a in answers):
        raise ValueError("'answers' must be a non-empty list of strings")
    context = obj.get("context")
    article_id = obj.get("article_id")
    if context is not None and not isinstance(context, str):
        raise ValueError("'context' must be a string or null")
    if article_id is not None and not isinstance(article_id, str):
        raise ValueError("'article_id' must be a string or null")
    return QAExample(
        id=ex_id,
        question=question,
        gold_answers=list(answers),
        context=context,
        article_id=article_id,
    )


def load_qa_dataset(path) -> Tuple[List[QAExample], LoadStats]:
    """Load a QA JSONL file.

    Examples whose context contains none of the gold answers are kept with
    a warning; generative-style datasets legitimately have non-extractive
    golds.
    """
    path = Path(path)
    examples: List[QAExample] = []
    seen = set()
    stats = LoadStats()
    for lineno, line in _iter_jsonl(path):
        try:
            example = _parse_qa_example(json.loads(line))
        except (json.JSONDecodeError, ValueError) as exc:
            stats.skipped += 1
            log.warning("%s:%d: skipping malformed QA record: %s", path, lineno, exc)
            continue
        if example.id in seen:
            stats.duplicates += 1
            log.warning("%s:%d: duplicate example id %r, keeping first", path, lineno, example.id)
            continue
        seen.add(example.id)
        if example.context is not None and not any(
            gold in example.context for gold in example.gold_answers
        ):
            log.warning("example %r: no gold answer occurs in its context", example.id)
        examples.append(example)
    return examples, stats


def merge_qa_with_corpus(
    examples: List[QAExample], corpus: List[Article]
) -> Tuple[List[QAExample], int]:
    """Fill missing contexts from the referenced articles.

    Examples that reference an absent article are dropped; the drop count is
    returned. Examples that already carry a context, or reference nothing,
    pass through untouched.
    """
    by_id = {article.id: article for article in corpus}
    merged: List[QAExample] = []
    dropped = 0
    for example in examples:
        if example.context is not None or example.article_id is None:
            merged.append(example)
            continue
        article = by_id.get(example.article_id)
        if article is None:
            dropped += 1
            log.warning("example %r: article %r not in corpus, dropping", example.id, example.article_id)
            continue
        merged.append(
            QAExample(
                id=example.id,
                question=example.question,
                gold_answers=list(example.gold_answers),
                context=article.full_text(),
                article_id=example.article_id,
            )
        )
    return merged, dropped


def build_tokenized_corpus(articles: List[Article]) -> Tuple[List[TokenizedDoc], Vocabulary]:
    """Tokenize every article's full text, building the vocabulary as we go.

    Vocabulary indices follow first occurrence across the corpus, so the
    result is a pure function of the article order.
    """
    vocab = Vocabulary()
    docs = []
    for article in articles:
        pieces = tokenize(article.full_text())
        docs.append(
            TokenizedDoc(
                article_id=article.id,
                tokens=[vocab.add(term) for term, _, _ in pieces],
                char_offsets=[(start, end) for _, start, end in pieces],
            )
        )
    return docs, vocab


def tokenize_with_vocab(
    article_id: str, text: str, vocab: Vocabulary, drop_oov: bool = False
) -> TokenizedDoc:
    """Tokenize text against a frozen vocabulary.

    With drop_oov, out-of-vocabulary terms are silently removed (queries and
    unseen documents); otherwise an unknown term raises DataError.
    """
    tokens: List[int] = []
    offsets: List[Tuple[int, int]] = []
    for term, start, end in tokenize(text):
        if term not in vocab:
            if drop_oov:
                continue
            raise DataError(f"term {term!r} not in vocabulary (doc {article_id!r})")
        tokens.append(vocab.index(term))
        offsets.append((start, end))
    return TokenizedDoc(article_id=article_id, tokens=tokens, char_offsets=offsets)
