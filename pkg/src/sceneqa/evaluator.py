"""Top-1 accuracy by question type and hop, and a question-only baseline."""

from __future__ import annotations

import csv
import io
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .templates import QTYPES

# column labels in report order
QTYPE_LABELS = {
    "exist": "Exist",
    "count": "Count",
    "query_object": "Object",
    "query_status": "Status",
    "comparison": "Comparison",
}
HOPS = ("H0", "H1", "All")


class EvaluationError(ValueError):
    pass


def canonical_answer(answer) -> str:
    """Trimmed, lowercased answer; integer answers compare by value ("02" == "2")."""
    text = str(answer).strip().lower()
    try:
        return str(int(text))
    except ValueError:
        return text


def predictions_from_records(records: Iterable[Mapping]) -> Dict[str, str]:
    preds: Dict[str, str] = {}
    for rec in records:
        try:
            qid, answer = rec["question_id"], rec["answer"]
        except (KeyError, TypeError):
            raise EvaluationError(f"prediction record without question_id/answer: {rec!r}") from None
        if qid in preds:
            raise EvaluationError(f"duplicate prediction for question {qid!r}")
        preds[qid] = str(answer)
    return preds


@dataclass
class MetricsReport:
    correct: Dict[Tuple[str, str], int] = field(default_factory=dict)
    total: Dict[Tuple[str, str], int] = field(default_factory=dict)
    missing: int = 0
    extra: int = 0

    @property
    def overall_total(self) -> int:
        return sum(self.total.get((q, "All"), 0) for q in QTYPES)

    @property
    def overall(self) -> Optional[float]:
        n = self.overall_total
        if n == 0:
            return None
        return 100.0 * sum(self.correct.get((q, "All"), 0) for q in QTYPES) / n

    def accuracy(self, qtype: str, hop: str) -> Optional[float]:
        n = self.total.get((qtype, hop), 0)
        if n == 0:
            return None
        return 100.0 * self.correct.get((qtype, hop), 0) / n

    def columns(self) -> List[str]:
        return [f"{QTYPE_LABELS[q]}-{h}" for q in QTYPES for h in HOPS] + ["Acc"]

    def row(self, digits: int = 1) -> List[str]:
        def fmt(v):
            return "-" if v is None else f"{v:.{digits}f}"

        return [fmt(self.accuracy(q, h)) for q in QTYPES for h in HOPS] + [fmt(self.overall)]

    def table(self, name: str = "model", digits: int = 1, delimiter: str = ",") -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, delimiter=delimiter, lineterminator="\n")
        writer.writerow(["Model"] + self.columns())
        writer.writerow([name] + self.row(digits))
        return buf.getvalue()

    def to_dict(self) -> dict:
        cells = {}
        for q in QTYPES:
            for h in HOPS:
                n = self.total.get((q, h), 0)
                cells[f"{q}/{h}"] = {
                    "correct": self.correct.get((q, h), 0),
                    "total": n,
                    "accuracy": self.accuracy(q, h),
                }
        return {
            "overall": self.overall,
            "total": self.overall_total,
            "missing": self.missing,
            "extra": self.extra,
            "cells": cells,
        }


def evaluate(gt: Sequence[Mapping], preds: Mapping[str, str]) -> MetricsReport:
    """Score predictions against ground truth; missing predictions count as wrong.

    ``gt`` records need ``question_id``, ``answer``, ``qtype`` and ``hop``;
    ``preds`` maps question id to predicted answer.
    """
    correct: Counter = Counter()
    total: Counter = Counter()
    missing = 0
    seen = set()
    for rec in gt:
        qid = rec["question_id"]
        if qid in seen:
            raise EvaluationError(f"duplicate ground-truth question {qid!r}")
        seen.add(qid)
        qtype = rec["qtype"]
        if qtype not in QTYPES:
            raise EvaluationError(f"unknown qtype {qtype!r} for {qid}")
        hop = f"H{int(rec['hop'])}"
        pred = preds.get(qid)
        if pred is None:
            missing += 1
        hit = pred is not None and canonical_answer(pred) == canonical_answer(rec["answer"])
        for cell in ((qtype, hop), (qtype, "All")):
            total[cell] += 1
            correct[cell] += hit
    extra = sum(1 for qid in preds if qid not in seen)
    return MetricsReport(dict(correct), dict(total), missing=missing, extra=extra)


class BlindBaseline:
    """Predicts the most frequent training answer of a question's template.

    Unseen templates get the global majority answer. Ties go to the
    lexicographically smallest answer.
    """

    def __init__(self, train: Sequence[Mapping]):
        if not train:
            raise ValueError("blind baseline needs a non-empty training set")
        per_template: Dict[str, Counter] = defaultdict(Counter)
        overall: Counter = Counter()
        for rec in train:
            answer = canonical_answer(rec["answer"])
            per_template[rec["template_id"]][answer] += 1
            overall[answer] += 1
        self.by_template = {t: _majority(c) for t, c in per_template.items()}
        self.fallback = _majority(overall)

    def predict(self, record: Mapping) -> str:
        return self.by_template.get(record.get("template_id"), self.fallback)

    def predictions(self, records: Iterable[Mapping]) -> Dict[str, str]:
        return {rec["question_id"]: self.predict(rec) for rec in records}


def _majority(counts: Counter) -> str:
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0]


def blind_baseline(train: Sequence[Mapping]) -> BlindBaseline:
    return BlindBaseline(train)
