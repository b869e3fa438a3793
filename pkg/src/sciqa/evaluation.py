"""SQuAD v1.1-style scoring: answer normalization, token F1, exact match,
macro-averaged reports, and answer-length histograms.

Normalization order: lowercase, delete punctuation characters (no space
inserted, so "rna-virus" becomes "rnavirus"), drop the articles a/an/the as
whole words, collapse whitespace. Token overlap is a multiset intersection.
Aggregates are stored at full precision; rounding happens only in rendering.
"""

import json
import logging
import re
import string
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Sequence, Tuple

from .corpus import QAExample
from .errors import DataError

log = logging.getLogger(__name__)

_PUNCTUATION = set(string.punctuation)
_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")


def normalize_answer(text: str) -> str:
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCTUATION)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def token_f1(prediction: str, gold: str) -> float:
    """Harmonic mean of precision/recall over normalized token multisets.

    Both sides normalizing to empty counts as a perfect match (1.0); exactly
    one empty, or zero overlap, scores 0.
    """
    pred_tokens = normalize_answer(prediction).split()
    gold_tokens = normalize_answer(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def exact_match(prediction: str, gold: str) -> int:
    return int(normalize_answer(prediction) == normalize_answer(gold))


def score_against_golds(prediction: str, golds: Sequence[str]) -> Tuple[float, int, int]:
    """Best F1 and EM over all golds, plus the index of the best-F1 gold."""
    if not golds:
        raise ValueError("gold answer list is empty")
    best_f1 = -1.0
    matched = 0
    em = 0
    for i, gold in enumerate(golds):
        f1 = token_f1(prediction, gold)
        if f1 > best_f1:
            best_f1 = f1
            matched = i
        em = max(em, exact_match(prediction, gold))
    return best_f1, em, matched


def length_histogram(texts: Sequence[str], unit: str = "words") -> Dict[int, int]:
    """Histogram of answer lengths; "words" counts whitespace tokens of the
    raw text, "chars" counts characters."""
    if unit not in ("words", "chars"):
        raise ValueError(f"unknown length unit {unit!r}")
    counts: Dict[int, int] = {}
    for text in texts:
        length = len(text.split()) if unit == "words" else len(text)
        counts[length] = counts.get(length, 0) + 1
    return counts


@dataclass
class EvalExampleResult:
    example_id: str
    best_f1: float
    em: int
    prediction_text: str
    matched_gold: int

    def to_dict(self) -> dict:
        return {
            "id": self.example_id,
            "best_f1": self.best_f1,
            "em": self.em,
            "prediction": self.prediction_text,
            "matched_gold": self.matched_gold,
        }


@dataclass
class EvalReport:
    dataset_name: str
    system_name: str
    macro_f1_x100: float
    em_x100: float
    example_count: int
    per_example: List[EvalExampleResult]
    pred_lengths: Dict[int, int] = field(default_factory=dict)
    gold_lengths: Dict[int, int] = field(default_factory=dict)
    missing_predictions: int = 0

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset_name,
            "system": self.system_name,
            "macro_f1": self.macro_f1_x100,
            "em": self.em_x100,
            "n": self.example_count,
            "per_example": [r.to_dict() for r in self.per_example],
            "pred_lengths": {str(k): v for k, v in sorted(self.pred_lengths.items())},
            "gold_lengths": {str(k): v for k, v in sorted(self.gold_lengths.items())},
            "missing_predictions": self.missing_predictions,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "EvalReport":
        per_example = [
            EvalExampleResult(
                example_id=r["id"],
                best_f1=float(r["best_f1"]),
                em=int(r["em"]),
                prediction_text=r.get("prediction", ""),
                matched_gold=int(r.get("matched_gold", 0)),
            )
            for r in payload.get("per_example", [])
        ]
        return cls(
            dataset_name=payload["dataset"],
            system_name=payload["system"],
            macro_f1_x100=float(payload["macro_f1"]),
            em_x100=float(payload["em"]),
            example_count=int(payload["n"]),
            per_example=per_example,
            pred_lengths={int(k): v for k, v in payload.get("pred_lengths", {}).items()},
            gold_lengths={int(k): v for k, v in payload.get("gold_lengths", {}).items()},
            missing_predictions=int(payload.get("missing_predictions", 0)),
        )

    def save(self, path) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path) -> "EvalReport":
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise DataError(f"cannot read report {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: malformed report JSON: {exc}") from exc
        return cls.from_dict(payload)


def build_report(
    dataset_name: str,
    system_name: str,
    results: Sequence[EvalExampleResult],
    pred_lengths: Dict[int, int],
    gold_lengths: Dict[int, int],
    missing_predictions: int = 0,
) -> EvalReport:
    """Aggregate per-example results into a report (plain means x100)."""
    if not results:
        raise DataError("empty dataset: nothing to aggregate")
    macro_f1 = 100.0 * sum(r.best_f1 for r in results) / len(results)
    em = 100.0 * sum(r.em for r in results) / len(results)
    return EvalReport(
        dataset_name=dataset_name,
        system_name=system_name,
        macro_f1_x100=macro_f1,
        em_x100=em,
        example_count=len(results),
        per_example=list(results),
        pred_lengths=dict(pred_lengths),
        gold_lengths=dict(gold_lengths),
        missing_predictions=missing_predictions,
    )


def load_predictions(path) -> Dict[str, str]:
    """Read a predictions file: one JSON object of example_id -> text."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read predictions {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed predictions JSON: {exc}") from exc
    if not isinstance(payload, dict) or any(
        not isinstance(k, str) or not isinstance(v, str) for k, v in payload.items()
    ):
        raise DataError(f"{path}: predictions must be a JSON object of id -> text")
    return payload


def save_predictions(predictions: Mapping[str, str], path) -> None:
    Path(path).write_text(
        json.dumps(dict(predictions), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def evaluate(
    predictions: Mapping[str, str],
    dataset: Sequence[QAExample],
    dataset_name: str = "dataset",
    system_name: str = "system",
) -> EvalReport:
    """Score predictions against a QA dataset.

    Missing predictions score as the empty string and are counted. The gold
    length histogram uses each example's first gold answer so its total
    equals the dataset size.
    """
    seen = set()
    for example in dataset:
        if example.id in seen:
            raise DataError(f"duplicate example id {example.id!r} in dataset")
        seen.add(example.id)
    if not dataset:
        raise DataError("empty dataset")

    results = []
    missing = 0
    pred_texts = []
    gold_texts = []
    for example in dataset:
        if example.id in predictions:
            prediction = predictions[example.id]
        else:
            prediction = ""
            missing += 1
        best_f1, em, matched = score_against_golds(prediction, example.gold_answers)
        results.append(
            EvalExampleResult(
                example_id=example.id,
                best_f1=best_f1,
                em=em,
                prediction_text=prediction,
                matched_gold=matched,
            )
        )
        pred_texts.append(prediction)
        gold_texts.append(example.gold_answers[0])
    if missing:
        log.warning("%d of %d examples had no prediction; scored as empty", missing, len(dataset))
    return build_report(
        dataset_name,
        system_name,
        results,
        pred_lengths=length_histogram(pred_texts),
        gold_lengths=length_histogram(gold_texts),
        missing_predictions=missing,
    )
