"""Tokenizer, inverted index, and multi-field BM25 scoring.

Scoring model per field f with weight w_f:

    score(q, d) = sum_f w_f * sum_{t in q} idf_f(t) * tf * (k1 + 1)
                  / (tf + k1 * (1 - b + b * |d|_f / avgdl_f))

with tf = tf(t, d, f) and the non-negative Lucene idf variant

    idf_f(t) = ln(1 + (N - df(t, f) + 0.5) / (df(t, f) + 0.5)).

Repeated query tokens contribute repeatedly (the sum runs over query
tokens, not distinct terms). Terms absent from a field contribute 0.

Tokenization is a fixed rule, not a port of an external tokenizer: text is
lowercased and a token is a maximal run of alphanumeric characters,
optionally containing one internal apostrophe. No stemming, no stopword
removal; body word counts elsewhere in the toolkit use the same rule.

Index building is deterministic (corpus order), a built index is immutable,
and searching is read-only, so indexes are safe to share across threads.
"""

from __future__ import annotations

import math
import pickle
import re
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .collection import Corpus, Document
from .errors import DataError, ValidationError

_TOKEN_RE = re.compile(r"[^\W_]+(?:'[^\W_]+)?")

DEFAULT_FIELDS = ("title", "body")

_INDEX_MAGIC = b"rejudge-index:1\n"


def tokenize(text: str) -> list[str]:
    """Lowercased tokens; deterministic for a given input."""
    return _TOKEN_RE.findall(text.lower())


def word_count(text: str) -> int:
    return len(tokenize(text))


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4
    field_weights: Mapping[str, float] = field(
        default_factory=lambda: {"title": 1.0, "body": 1.0}
    )

    def __post_init__(self):
        if self.k1 < 0:
            raise ValidationError(f"k1 must be >= 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValidationError(f"b must be in [0, 1], got {self.b}")

    def weight(self, field_name: str) -> float:
        return float(self.field_weights.get(field_name, 1.0))


@dataclass
class _FieldStats:
    # postings: term -> [(doc ordinal, tf)], ordinals ascending
    postings: dict[str, list[tuple[int, int]]]
    lengths: list[int]
    avgdl: float


def _field_text(doc: Document, field_name: str) -> str:
    if field_name == "title":
        return doc.title
    if field_name == "body":
        return doc.body
    raise ValidationError(f"unknown field {field_name!r}; expected 'title' or 'body'")


class Index:
    """Immutable per-field postings with document length statistics."""

    def __init__(self, fields: Sequence[str], doc_ids: Sequence[str],
                 field_stats: dict[str, _FieldStats]):
        self.fields = tuple(fields)
        self.doc_ids = list(doc_ids)
        self._ordinal = {doc_id: i for i, doc_id in enumerate(self.doc_ids)}
        self._stats = field_stats

    @property
    def n_docs(self) -> int:
        return len(self.doc_ids)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._ordinal

    def ordinal(self, doc_id: str) -> int:
        try:
            return self._ordinal[doc_id]
        except KeyError:
            raise DataError(f"doc_id {doc_id!r} not in index") from None

    def df(self, term: str, field_name: str) -> int:
        plist = self._stats[field_name].postings.get(term)
        return len(plist) if plist else 0

    def avgdl(self, field_name: str) -> float:
        return self._stats[field_name].avgdl

    def doc_length(self, doc_id: str, field_name: str) -> int:
        return self._stats[field_name].lengths[self.ordinal(doc_id)]

    def postings(self, term: str, field_name: str) -> list[tuple[int, int]]:
        return self._stats[field_name].postings.get(term, [])

    def idf(self, term: str, field_name: str) -> float:
        df = self.df(term, field_name)
        return math.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))

    def term_frequency(self, term: str, doc_id: str, field_name: str) -> int:
        plist = self._stats[field_name].postings.get(term)
        if not plist:
            return 0
        ordinal = self.ordinal(doc_id)
        i = bisect_left(plist, (ordinal,))
        if i < len(plist) and plist[i][0] == ordinal:
            return plist[i][1]
        return 0

    # -- serialization: single file, versioned magic header; the payload
    #    layout is internal and may change between versions.

    def save(self, path: str | Path) -> None:
        payload = {
            "fields": self.fields,
            "doc_ids": self.doc_ids,
            "stats": {
                name: (stats.postings, stats.lengths, stats.avgdl)
                for name, stats in self._stats.items()
            },
        }
        with Path(path).open("wb") as handle:
            handle.write(_INDEX_MAGIC)
            pickle.dump(payload, handle, protocol=4)

    @classmethod
    def load(cls, path: str | Path) -> "Index":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"index file not found: {path}")
        with path.open("rb") as handle:
            magic = handle.read(len(_INDEX_MAGIC))
            if magic != _INDEX_MAGIC:
                raise DataError(f"{path}: not a serialized index (bad header)")
            payload = pickle.load(handle)
        stats = {
            name: _FieldStats(postings=post, lengths=lengths, avgdl=avgdl)
            for name, (post, lengths, avgdl) in payload["stats"].items()
        }
        return cls(payload["fields"], payload["doc_ids"], stats)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Index):
            return NotImplemented
        return (
            self.fields == other.fields
            and self.doc_ids == other.doc_ids
            and self._stats == other._stats
        )


def build_index(corpus: Corpus, fields: Sequence[str] = DEFAULT_FIELDS) -> Index:
    """Index the given fields; deterministic for a given corpus."""
    if not fields:
        raise ValidationError("fields must be a non-empty subset of {'title', 'body'}")
    doc_ids = corpus.doc_ids()
    field_stats: dict[str, _FieldStats] = {}
    for field_name in fields:
        postings: dict[str, list[tuple[int, int]]] = {}
        lengths: list[int] = []
        for ordinal, doc in enumerate(corpus):
            tokens = tokenize(_field_text(doc, field_name))
            lengths.append(len(tokens))
            for term, tf in Counter(tokens).items():
                postings.setdefault(term, []).append((ordinal, tf))
        n = len(lengths)
        avgdl = sum(lengths) / n if n else 0.0
        field_stats[field_name] = _FieldStats(postings, lengths, avgdl)
    return Index(fields, doc_ids, field_stats)


def _tf_norm(tf: int, dl: int, avgdl: float, k1: float, b: float) -> float:
    # avgdl == 0 only when every doc is empty in the field; fall back to a
    # neutral length ratio so synthetic documents remain scorable.
    ratio = dl / avgdl if avgdl > 0 else 1.0
    return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * ratio))


def bm25_score(index: Index, params: Bm25Params, query_tokens: Sequence[str],
               doc_id: str) -> float:
    """Score one indexed document against query tokens."""
    ordinal = index.ordinal(doc_id)
    score = 0.0
    for field_name in index.fields:
        weight = params.weight(field_name)
        if weight == 0.0:
            continue
        stats = index._stats[field_name]
        dl = stats.lengths[ordinal]
        for term, qtf in Counter(query_tokens).items():
            plist = stats.postings.get(term)
            if not plist:
                continue
            i = bisect_left(plist, (ordinal,))
            if i >= len(plist) or plist[i][0] != ordinal:
                continue
            tf = plist[i][1]
            score += weight * qtf * index.idf(term, field_name) * _tf_norm(
                tf, dl, stats.avgdl, params.k1, params.b
            )
    return score


def score_synthetic(index: Index, params: Bm25Params, query_tokens: Sequence[str],
                    tokens: Mapping[str, Sequence[str]] | Sequence[str]) -> float:
    """Score a document that is not in the index.

    ``tokens`` maps field name to that field's token list; a plain token
    list is accepted when the index has exactly one field. Term frequencies
    and lengths come from the given tokens while N, df, and avgdl stay
    frozen at the index's values.
    """
    if not isinstance(tokens, Mapping):
        if len(index.fields) != 1:
            raise DataError(
                "a plain token list is ambiguous for a multi-field index; "
                "pass a mapping of field name to tokens"
            )
        tokens = {index.fields[0]: tokens}
    score = 0.0
    query_counts = Counter(query_tokens)
    for field_name in index.fields:
        weight = params.weight(field_name)
        field_tokens = tokens.get(field_name, ())
        if weight == 0.0 or not field_tokens:
            continue
        dl = len(field_tokens)
        tf_table = Counter(field_tokens)
        avgdl = index.avgdl(field_name)
        for term, qtf in query_counts.items():
            tf = tf_table.get(term, 0)
            if tf == 0:
                continue
            score += weight * qtf * index.idf(term, field_name) * _tf_norm(
                tf, dl, avgdl, params.k1, params.b
            )
    return score


def search(index: Index, params: Bm25Params, query: str | Sequence[str],
           k: int) -> list[tuple[str, float]]:
    """Top-k documents by (score desc, doc_id asc).

    Every document participates; ones matching no query term score 0.0, so
    a k larger than the corpus returns the whole corpus. Returned scores
    equal ``bm25_score`` for the same document.
    """
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    query_tokens = tokenize(query) if isinstance(query, str) else list(query)
    accumulator: dict[int, float] = {}
    for field_name in index.fields:
        weight = params.weight(field_name)
        if weight == 0.0:
            continue
        stats = index._stats[field_name]
        for term, qtf in Counter(query_tokens).items():
            plist = stats.postings.get(term)
            if not plist:
                continue
            idf = index.idf(term, field_name)
            for ordinal, tf in plist:
                contribution = weight * qtf * idf * _tf_norm(
                    tf, stats.lengths[ordinal], stats.avgdl, params.k1, params.b
                )
                accumulator[ordinal] = accumulator.get(ordinal, 0.0) + contribution

    doc_ids = index.doc_ids
    matched = sorted(
        ((doc_ids[ordinal], score) for ordinal, score in accumulator.items()),
        key=lambda pair: (-pair[1], pair[0]),
    )
    all_positive = all(score > 0.0 for _, score in matched)
    if len(matched) >= k and all_positive:
        return matched[:k]
    # Zero-score documents are tied; merge them in doc_id order.
    unmatched = sorted(
        doc_id for i, doc_id in enumerate(doc_ids) if i not in accumulator
    )
    combined = matched + [(doc_id, 0.0) for doc_id in unmatched]
    if not all_positive:
        combined.sort(key=lambda pair: (-pair[1], pair[0]))
    return combined[:k]


def search_run(index: Index, params: Bm25Params, queries: Iterable, k: int,
               tag: str = "bm25") -> "Run":
    """Run the engine over a query set and package the results as a Run."""
    from .collection import Run

    scores = {query.query_id: search(index, params, query.text, k) for query in queries}
    return Run.from_scores(tag, scores)
