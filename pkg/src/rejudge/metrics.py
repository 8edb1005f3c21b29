"""Evaluation statistics over runs, qrels, and annotation rounds.

Conventions pinned here because they change the headline numbers:

- nDCG uses linear gain (the grade itself, not 2^grade - 1) with a
  log2(rank + 1) discount, the trec_eval/BEIR convention. Queries whose
  ideal ranking is empty (no judged docs, or all grades 0) score 0 and are
  kept in the mean so query counts stay stable across models.
- hole@k and the short-non-relevant error rate report micro-averages as
  headline numbers: totals divided by k * |queries|.
- Quartiles interpolate linearly; the 95% CI of the mean uses the normal
  approximation mean +/- 1.96 * sd / sqrt(n) with the sample sd.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .collection import Corpus, Qrels, Run
from .errors import DataError, ValidationError
from .lexical import tokenize


@dataclass
class MetricReport:
    metric: str
    k: int
    per_query: dict[str, float]
    mean: float
    micro: float | None = None
    # queries with an empty ideal ranking (unjudged or all-zero grades)
    flagged: tuple[str, ...] = ()


@dataclass(frozen=True)
class LengthSummary:
    n: int
    mean: float
    median: float
    q1: float
    q3: float
    ci95_low: float
    ci95_high: float


@dataclass
class RatingMatrix:
    """Per-item category counts for a fixed-size rater panel."""

    items: list[tuple[object, Mapping[int, int]]]
    raters_per_item: int

    def __post_init__(self):
        if self.raters_per_item < 2:
            raise ValidationError(
                f"raters_per_item must be >= 2, got {self.raters_per_item}"
            )
        for item_id, counts in self.items:
            total = sum(counts.values())
            if total != self.raters_per_item:
                raise DataError(
                    f"item {item_id!r} has {total} ratings, expected {self.raters_per_item}"
                )
            if any(count < 0 for count in counts.values()):
                raise DataError(f"item {item_id!r} has a negative category count")


def _check_k(k: int) -> None:
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")


def ndcg_at_k(run: Run, qrels: Qrels, k: int) -> MetricReport:
    """Normalized DCG at cutoff k, averaged over the run's queries."""
    _check_k(k)
    per_query: dict[str, float] = {}
    flagged: list[str] = []
    for query_id in run.query_ids():
        judged = qrels.for_query(query_id)
        dcg = 0.0
        for position, entry in enumerate(run.top(query_id, k), start=1):
            grade = judged.get(entry.doc_id, 0)
            if grade:
                dcg += grade / math.log2(position + 1)
        ideal = sorted(judged.values(), reverse=True)[:k]
        idcg = sum(
            grade / math.log2(position + 1)
            for position, grade in enumerate(ideal, start=1)
        )
        if idcg == 0.0:
            per_query[query_id] = 0.0
            flagged.append(query_id)
        else:
            per_query[query_id] = dcg / idcg
    mean = sum(per_query.values()) / len(per_query) if per_query else 0.0
    return MetricReport("ndcg", k, per_query, mean, flagged=tuple(flagged))


def hole_at_k(run: Run, qrels: Qrels, k: int) -> MetricReport:
    """Fraction of top-k results without any relevance judgment."""
    _check_k(k)
    per_query: dict[str, float] = {}
    total_unjudged = 0
    for query_id in run.query_ids():
        top = run.top(query_id, k)
        unjudged = sum(
            1 for entry in top if not qrels.is_judged(query_id, entry.doc_id)
        )
        total_unjudged += unjudged
        per_query[query_id] = unjudged / len(top) if top else 0.0
    n_queries = len(per_query)
    mean = sum(per_query.values()) / n_queries if n_queries else 0.0
    micro = total_unjudged / (k * n_queries) if n_queries else 0.0
    return MetricReport("hole", k, per_query, mean, micro=micro)


def error_rate_at_k(run: Run, qrels: Qrels, corpus: Corpus, k: int,
                    min_words: int = 20) -> MetricReport:
    """Rate of retrieved docs that are both non-relevant and short.

    A top-k document counts as a mistake iff its judgment is 0 or missing
    AND its body has fewer than ``min_words`` tokens. Headline value is the
    micro-average: total mistakes / (k * |queries|).
    """
    _check_k(k)
    per_query: dict[str, float] = {}
    total_mistakes = 0
    body_words: dict[str, int] = {}
    for query_id in run.query_ids():
        mistakes = 0
        for entry in run.top(query_id, k):
            grade = qrels.grade(query_id, entry.doc_id)
            if grade:
                continue
            if entry.doc_id not in body_words:
                body_words[entry.doc_id] = len(tokenize(corpus.get(entry.doc_id).body))
            if body_words[entry.doc_id] < min_words:
                mistakes += 1
        total_mistakes += mistakes
        per_query[query_id] = mistakes / k
    n_queries = len(per_query)
    mean = sum(per_query.values()) / n_queries if n_queries else 0.0
    micro = total_mistakes / (k * n_queries) if n_queries else 0.0
    return MetricReport("error_rate", k, per_query, mean, micro=micro)


def length_summary(run: Run, corpus: Corpus, k: int) -> LengthSummary:
    """Distribution of body word counts over top-k results, pooled."""
    _check_k(k)
    lengths: list[int] = []
    for query_id in run.query_ids():
        for entry in run.top(query_id, k):
            lengths.append(len(tokenize(corpus.get(entry.doc_id).body)))
    if not lengths:
        raise DataError("empty run: no retrieved documents to summarize")
    values = np.asarray(lengths, dtype=float)
    q1, median, q3 = np.percentile(values, (25, 50, 75))
    mean = float(values.mean())
    sd = float(values.std(ddof=1)) if len(values) > 1 else 0.0
    half_width = 1.96 * sd / math.sqrt(len(values))
    return LengthSummary(
        n=len(values),
        mean=mean,
        median=float(median),
        q1=float(q1),
        q3=float(q3),
        ci95_low=mean - half_width,
        ci95_high=mean + half_width,
    )


def _average_ranks(values: Sequence[float]) -> np.ndarray:
    """1-based ranks with ties sharing the mean rank of their block."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=float)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for position in range(i, j + 1):
            ranks[order[position]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson correlation of average-ranked values."""
    if len(xs) != len(ys):
        raise ValidationError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ValidationError("need at least 2 observations")
    if len(set(xs)) == 1 or len(set(ys)) == 1:
        raise DataError("spearman undefined: zero variance in a series")
    rx = _average_ranks(xs)
    ry = _average_ranks(ys)
    rho = float(np.corrcoef(rx, ry)[0, 1])
    return max(-1.0, min(1.0, rho))


def fleiss_kappa(matrix: RatingMatrix) -> float:
    """Chance-corrected multi-rater agreement over a rating matrix."""
    if len(matrix.items) < 2:
        raise DataError("fleiss kappa needs at least 2 items")
    n = matrix.raters_per_item
    categories: set[int] = set()
    for _, counts in matrix.items:
        categories.update(key for key, count in counts.items() if count)
    total_ratings = n * len(matrix.items)
    per_item_agreement = []
    category_totals = {category: 0 for category in categories}
    for _, counts in matrix.items:
        agreement = sum(count * (count - 1) for count in counts.values())
        per_item_agreement.append(agreement / (n * (n - 1)))
        for category, count in counts.items():
            if count:
                category_totals[category] += count
    observed = sum(per_item_agreement) / len(per_item_agreement)
    expected = sum(
        (total / total_ratings) ** 2 for total in category_totals.values()
    )
    if expected == 1.0:
        raise DataError("fleiss kappa undefined: all ratings in one category")
    return (observed - expected) / (1.0 - expected)
