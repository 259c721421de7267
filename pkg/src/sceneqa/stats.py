"""Descriptive statistics of a question-answer dataset."""

from __future__ import annotations

import csv
import io
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Sequence, Tuple

_STRIP = str.maketrans("", "", "?.,;")


def tokenize(question: str) -> List[str]:
    """Lowercase, drop ``?.,;`` and split on whitespace."""
    return question.lower().translate(_STRIP).split()


@dataclass
class StatsReport:
    total: int
    lengths: Dict[int, int]
    qtypes: Dict[str, int]
    answers: Dict[str, Dict[str, int]]
    # prefix tuple (1..k words) -> number of questions starting with it
    prefixes: Dict[Tuple[str, ...], int] = field(default_factory=dict)
    k: int = 4

    def trie(self) -> dict:
        """Nested ``{word: {"count": n, "children": {...}}}`` view of the prefixes."""
        root: dict = {}
        for prefix in sorted(self.prefixes):
            node = root
            for word in prefix[:-1]:
                node = node[word]["children"]
            node[prefix[-1]] = {"count": self.prefixes[prefix], "children": {}}
        return root

    def prefix_count(self, words: Sequence[str]) -> int:
        return self.prefixes.get(tuple(w.lower() for w in words), 0)

    def to_dict(self) -> dict:
        return {
            "total": self.total,
            "k": self.k,
            "lengths": {str(n): c for n, c in sorted(self.lengths.items())},
            "qtypes": dict(sorted(self.qtypes.items())),
            "answers": {q: dict(sorted(a.items())) for q, a in sorted(self.answers.items())},
            "first_words": self.trie(),
        }

    def tables(self) -> Dict[str, str]:
        """CSV tables keyed by a short name, ready for plotting elsewhere."""
        out = {}
        out["lengths"] = _csv(["words", "count"], sorted(self.lengths.items()))
        out["qtypes"] = _csv(["qtype", "count"], sorted(self.qtypes.items()))
        out["answers"] = _csv(
            ["qtype", "answer", "count"],
            [(q, a, c) for q, hist in sorted(self.answers.items()) for a, c in sorted(hist.items())],
        )
        out["first_words"] = _csv(
            ["depth", "prefix", "count"],
            [(len(p), " ".join(p), c) for p, c in sorted(self.prefixes.items())],
        )
        return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def compute_stats(records: Iterable[Mapping], k: int = 4) -> StatsReport:
    """Length, qtype, answer and first-k-word distributions of ``records``.

    Each record needs ``question``, ``answer`` and ``qtype`` fields.

    Raises:
        ValueError: ``records`` is empty or ``k < 1``.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    lengths: Counter = Counter()
    qtypes: Counter = Counter()
    answers: Dict[str, Counter] = {}
    prefixes: Counter = Counter()
    total = 0
    for rec in records:
        total += 1
        words = tokenize(rec["question"])
        lengths[len(words)] += 1
        qtypes[rec["qtype"]] += 1
        answers.setdefault(rec["qtype"], Counter())[str(rec["answer"])] += 1
        for depth in range(1, min(k, len(words)) + 1):
            prefixes[tuple(words[:depth])] += 1
    if total == 0:
        raise ValueError("cannot compute statistics of an empty dataset")
    return StatsReport(
        total=total,
        lengths=dict(lengths),
        qtypes=dict(qtypes),
        answers={q: dict(c) for q, c in answers.items()},
        prefixes=dict(prefixes),
        k=k,
    )
