"""Corpus denoising: strip titles, drop short bodies, reconcile qrels.

The length threshold keeps documents whose body has at least ``min_words``
tokens (a 19-word body goes, a 20-word body stays). Filtering looks at the
body only; the title never counts toward the threshold.

Average document lengths are reported body-only, with a title+body variant
alongside, since collections disagree on whether titles count as content.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .collection import Corpus, Document, Qrels, QuerySet, Run
from .errors import ValidationError
from .lexical import Bm25Params, build_index, search_run, tokenize
from .metrics import ndcg_at_k

DEFAULT_MIN_WORDS = 20


@dataclass
class DenoiseReport:
    judgments_before: int
    judgments_after: int
    removed_by_grade: dict[int, int]
    docs_before: int | None = None
    docs_after: int | None = None
    avg_len_before: float | None = None
    avg_len_after: float | None = None
    avg_len_title_body_before: float | None = None
    avg_len_title_body_after: float | None = None

    def __post_init__(self):
        removed = sum(self.removed_by_grade.values())
        if self.judgments_after + removed != self.judgments_before:
            raise ValidationError(
                "inconsistent report: "
                f"{self.judgments_after} + {removed} != {self.judgments_before}"
            )
        if (
            self.docs_before is not None
            and self.docs_after is not None
            and self.docs_after > self.docs_before
        ):
            raise ValidationError("docs_after exceeds docs_before")

    def to_dict(self) -> dict:
        return {
            "documents": {"before": self.docs_before, "after": self.docs_after},
            "avg_body_words": {"before": self.avg_len_before, "after": self.avg_len_after},
            "avg_title_body_words": {
                "before": self.avg_len_title_body_before,
                "after": self.avg_len_title_body_after,
            },
            "judgments": {"before": self.judgments_before, "after": self.judgments_after},
            "removed_by_grade": {str(k): v for k, v in sorted(self.removed_by_grade.items())},
        }


def strip_titles(corpus: Corpus) -> Corpus:
    """Empty every title; doc_ids, bodies, and metadata are untouched."""
    return Corpus(
        Document(doc.doc_id, "", doc.body, doc.metadata) for doc in corpus
    )


def filter_short(corpus: Corpus, min_words: int = DEFAULT_MIN_WORDS,
                 word_counts: Mapping[str, int] | None = None) -> Corpus:
    """Keep exactly the documents whose body has >= min_words tokens.

    ``word_counts`` may supply precomputed body token counts to avoid
    re-tokenizing large corpora.
    """
    if min_words < 0:
        raise ValidationError(f"min_words must be >= 0, got {min_words}")

    def count(doc: Document) -> int:
        if word_counts is not None and doc.doc_id in word_counts:
            return word_counts[doc.doc_id]
        return len(tokenize(doc.body))

    return Corpus(doc for doc in corpus if count(doc) >= min_words)


def reconcile_qrels(qrels: Qrels, corpus: Corpus) -> tuple[Qrels, DenoiseReport]:
    """Drop judgments whose document left the corpus; grades never change.

    The returned report covers the judgment side only; the corpus-level
    fields are filled by ``denoise_corpus``.
    """
    kept = Qrels()
    removed = {0: 0, 1: 0, 2: 0}
    for (query_id, doc_id), grade in qrels.items():
        if doc_id in corpus:
            kept.add(query_id, doc_id, grade)
        else:
            removed[grade] += 1
    report = DenoiseReport(
        judgments_before=len(qrels),
        judgments_after=len(kept),
        removed_by_grade=removed,
    )
    return kept, report


def _mean(values: Sequence[int]) -> float | None:
    return sum(values) / len(values) if values else None


def denoise_corpus(corpus: Corpus, qrels: Qrels,
                   min_words: int = DEFAULT_MIN_WORDS,
                   strip: bool = True) -> tuple[Corpus, Qrels, DenoiseReport]:
    """Full pipeline: optional title strip, length filter, qrels reconcile."""
    body_counts = {doc.doc_id: len(tokenize(doc.body)) for doc in corpus}
    title_counts = {doc.doc_id: len(tokenize(doc.title)) for doc in corpus}

    working = strip_titles(corpus) if strip else corpus
    filtered = filter_short(working, min_words, word_counts=body_counts)
    kept_qrels, report = reconcile_qrels(qrels, filtered)

    kept_ids = [doc.doc_id for doc in filtered]
    report.docs_before = len(corpus)
    report.docs_after = len(filtered)
    report.avg_len_before = _mean([body_counts[d] for d in body_counts])
    report.avg_len_after = _mean([body_counts[d] for d in kept_ids])
    # Title+body variant uses the original titles even when stripping, so
    # the two columns describe the same documents before and after.
    report.avg_len_title_body_before = _mean(
        [body_counts[d] + title_counts[d] for d in body_counts]
    )
    report.avg_len_title_body_after = _mean(
        [body_counts[d] + (0 if strip else title_counts[d]) for d in kept_ids]
    )
    return filtered, kept_qrels, report


@dataclass(frozen=True)
class SweepEntry:
    threshold: int
    model: str
    ndcg: float
    # True when an external run was re-scored by deleting filtered docs and
    # closing ranks; re-retrieval is impossible from a run file.
    approximate: bool


def _prune_run(run: Run, corpus: Corpus) -> Run:
    pruned = {
        query_id: [
            (entry.doc_id, entry.score)
            for entry in entries
            if entry.doc_id in corpus
        ]
        for query_id, entries in run.rankings.items()
    }
    return Run.from_scores(run.tag, pruned)


def threshold_sweep(corpus: Corpus, queries: QuerySet, qrels: Qrels,
                    thresholds: Sequence[int],
                    params: Bm25Params | None = None,
                    k: int = 10,
                    strip: bool = True,
                    external_runs: Iterable[Run] = ()) -> list[SweepEntry]:
    """nDCG@k per length threshold, for the built-in engine and, as an
    approximation, for externally supplied runs."""
    if list(thresholds) != sorted(thresholds):
        raise ValidationError("thresholds must be sorted ascending")
    params = params or Bm25Params()
    external_runs = list(external_runs)
    body_counts = {doc.doc_id: len(tokenize(doc.body)) for doc in corpus}
    base = strip_titles(corpus) if strip else corpus

    entries: list[SweepEntry] = []
    for threshold in thresholds:
        filtered = filter_short(base, threshold, word_counts=body_counts)
        kept_qrels, _ = reconcile_qrels(qrels, filtered)
        index = build_index(filtered, ("title", "body"))
        builtin = search_run(index, params, queries, k, tag="bm25")
        entries.append(
            SweepEntry(threshold, "bm25", ndcg_at_k(builtin, kept_qrels, k).mean, False)
        )
        for run in external_runs:
            pruned = _prune_run(run, filtered)
            entries.append(
                SweepEntry(threshold, run.tag, ndcg_at_k(pruned, kept_qrels, k).mean, True)
            )
    return entries
