"""Dataset splitting, accuracy evaluation, and the tf-idf retrieval baseline.

The split maximizes article diversity in the test set: articles are
visited in ascending case-support order and one supporting case is moved
into the test set per still-uncovered article, then the remainder is
filled at random. Accuracy counts a hit when the system's first predicted
article is among the record's cited articles.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import EmptyIndex, TooFewRecords
from .ingest import JudgmentRecord


@dataclass(frozen=True)
class SplitPolicy:
    test_size: float | int = 0.2
    seed: int = 0

    def resolve_count(self, total: int) -> int:
        if isinstance(self.test_size, int):
            return self.test_size
        return int(round(self.test_size * total))


@dataclass
class CaseRow:
    case_name: str
    gold: list[str]
    predicted: list[str]
    hit: bool
    error: Optional[str] = None


@dataclass
class EvalReport:
    accuracy: float
    hits: int
    total: int
    rows: list[CaseRow] = field(default_factory=list)
    zero_shot_articles: Optional[int] = None

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "hits": self.hits,
            "total": self.total,
            "zero_shot_articles": self.zero_shot_articles,
            "rows": [
                {
                    "case_name": row.case_name,
                    "gold": list(row.gold),
                    "predicted": list(row.predicted),
                    "hit": row.hit,
                    "error": row.error,
                }
                for row in self.rows
            ],
        }


def split_records(
    records: Sequence[JudgmentRecord], policy: SplitPolicy
) -> tuple[list[JudgmentRecord], list[JudgmentRecord]]:
    """Partition records into train/test, maximizing test article coverage."""
    n_test = policy.resolve_count(len(records))
    if n_test < 0 or len(records) <= n_test:
        raise TooFewRecords(f"cannot take {n_test} test records from {len(records)}")
    if n_test == 0:
        return list(records), []
    rng = np.random.default_rng(policy.seed)
    support: dict[str, list[int]] = {}
    for i, record in enumerate(records):
        for number in record.cited_articles:
            support.setdefault(number, []).append(i)
    in_test: set[int] = set()
    covered: set[str] = set()
    # ascending case support, then article number, keeps the pass deterministic
    order = sorted(support, key=lambda a: (len(support[a]), _number_key(a)))
    for article in order:
        if len(in_test) >= n_test:
            break
        if article in covered:
            continue
        available = [i for i in support[article] if i not in in_test]
        if not available:
            continue
        pick = int(available[rng.integers(len(available))])
        in_test.add(pick)
        covered.update(records[pick].cited_articles)
    remaining = [i for i in range(len(records)) if i not in in_test]
    while len(in_test) < n_test:
        take = int(rng.integers(len(remaining)))
        in_test.add(remaining.pop(take))
    train = [records[i] for i in range(len(records)) if i not in in_test]
    test = [records[i] for i in sorted(in_test)]
    return train, test


def _number_key(number: str):
    return (0, int(number)) if number.isdigit() else (1, number)


def covered_articles(records: Sequence[JudgmentRecord]) -> set[str]:
    articles: set[str] = set()
    for record in records:
        articles.update(record.cited_articles)
    return articles


def zero_shot_count(
    train: Sequence[JudgmentRecord], test: Sequence[JudgmentRecord]
) -> int:
    """Distinct test-set articles with no supporting case in the train set."""
    return len(covered_articles(test) - covered_articles(train))


def evaluate(
    system: Callable[[str], list[str]],
    test: Sequence[JudgmentRecord],
    train_articles: Optional[set[str]] = None,
) -> EvalReport:
    """Score a case-text -> article-numbers system on held-out judgments.

    A system exception counts as a miss and is recorded on the case row.
    """
    if not test:
        raise TooFewRecords("test set is empty")
    rows = []
    hits = 0
    for record in test:
        predicted: list[str] = []
        error = None
        try:
            predicted = list(system(record.facts))
        except Exception as exc:  # noqa: BLE001 - failures score as misses
            error = f"{type(exc).__name__}: {exc}"
        hit = bool(predicted) and predicted[0] in set(record.cited_articles)
        hits += hit
        rows.append(
            CaseRow(
                case_name=record.case_name,
                gold=list(record.cited_articles),
                predicted=predicted,
                hit=hit,
                error=error,
            )
        )
    rows.sort(key=lambda row: row.case_name)
    zero_shot = None
    if train_articles is not None:
        zero_shot = len(covered_articles(test) - set(train_articles))
    return EvalReport(
        accuracy=hits / len(test),
        hits=hits,
        total=len(test),
        rows=rows,
        zero_shot_articles=zero_shot,
    )


# --------------------------------------------------------------------------
# tf-idf baseline
# --------------------------------------------------------------------------

_TOKEN = re.compile(r"\w+")


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


@dataclass
class TfidfIndex:
    """Raw-count tf with smoothed log idf over the article corpus only."""

    idf: dict[str, float]
    article_vectors: list[tuple[str, dict[str, float]]]  # (number, term -> weight)

    @classmethod
    def build(cls, articles: Sequence[tuple[str, str]]) -> "TfidfIndex":
        """Index (article number, body) pairs."""
        df: dict[str, int] = {}
        token_lists = []
        for number, body in articles:
            tokens = _tokens(body)
            token_lists.append((number, tokens))
            for term in set(tokens):
                df[term] = df.get(term, 0) + 1
        n_docs = len(articles)
        idf = {term: math.log(n_docs / (1 + count)) + 1.0 for term, count in df.items()}
        vectors = []
        for number, tokens in token_lists:
            tf: dict[str, int] = {}
            for term in tokens:
                tf[term] = tf.get(term, 0) + 1
            vectors.append((number, {t: c * idf[t] for t, c in tf.items()}))
        return cls(idf=idf, article_vectors=vectors)

    def vectorize(self, text: str) -> dict[str, float]:
        tf: dict[str, int] = {}
        for term in _tokens(text):
            if term in self.idf:
                tf[term] = tf.get(term, 0) + 1
        return {t: c * self.idf[t] for t, c in tf.items()}


def _sparse_cosine(a: dict[str, float], b: dict[str, float]) -> float:
    if len(b) < len(a):
        a, b = b, a
    dot = sum(w * b.get(t, 0.0) for t, w in a.items())
    norm_a = math.sqrt(sum(w * w for w in a.values()))
    norm_b = math.sqrt(sum(w * w for w in b.values()))
    if norm_a == 0.0 or norm_b == 0.0:
        return 0.0
    return dot / (norm_a * norm_b)


def tfidf_recommend(index: TfidfIndex, case_text: str, q: int = 5) -> list[str]:
    """Top-q article numbers by tf-idf cosine against the case text."""
    if not index.article_vectors:
        raise EmptyIndex("tf-idf index holds no articles")
    query = index.vectorize(case_text)
    scored = [
        (_sparse_cosine(query, vec), number)
        for number, vec in index.article_vectors
    ]
    scored.sort(key=lambda pair: (-pair[0], _number_key(pair[1])))
    return [number for _, number in scored[:q]]


# --------------------------------------------------------------------------
# Reporting
# --------------------------------------------------------------------------

def render_report(results: Sequence[tuple[str, EvalReport]]) -> tuple[str, dict]:
    """Text table plus stable-ordered JSON payload, best system first."""
    if not results:
        raise ValueError("render_report needs at least one result")
    ordered = sorted(results, key=lambda pair: (-pair[1].accuracy, pair[0]))
    width = max(len(name) for name, _ in ordered)
    lines = [f"{'system'.ljust(width)}  accuracy  hits/total"]
    for name, report in ordered:
        lines.append(
            f"{name.ljust(width)}  {report.accuracy:8.3f}  {report.hits}/{report.total}"
        )
    payload = {
        "systems": [
            {"name": name, **report.as_dict()} for name, report in ordered
        ]
    }
    return "\n".join(lines), payload


def report_to_json(payload: dict) -> str:
    return json.dumps(payload, indent=1, sort_keys=False, ensure_ascii=False)
