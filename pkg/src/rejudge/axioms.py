"""Axiomatic agreement analysis for ranking models.

Eight constraints are implemented: the term-frequency axioms TFC1, TFC3,
and M-TDC, the document-length axioms LNC1, TF-LNC, and LNC2, and the
semantic-similarity axioms STMC1 and STMC2. Each is a preference function
over a (query, d1, d2) pair that emits PreferFirst, PreferSecond, or
NoPreference when its preconditions fail.

Real document pairs rarely satisfy preconditions exactly, so "equal
length" means a 10% relative tolerance, and the same tolerance applies to
idf equality in TFC3. LNC2 is evaluated on synthetic pairs only: the first
document is an m-times self-concatenation of the second (per field), and a
model agrees when it scores the concatenation at least as high.

Every preference function is evaluated in both directions; when the
directional precondition fires both ways the result is NoPreference, which
makes swapping the pair flip PreferFirst and PreferSecond by construction.

STMC1 and STMC2 need a term-similarity provider. The shipped one reads a
word-vector text file (``term v1 v2 ... vn`` per line) and uses cosine;
a hand-written lookup table serves for tests and small experiments.
"""

from __future__ import annotations

import random
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .collection import Corpus, Document, QuerySet, Run
from .errors import DataError, ParseError, ValidationError
from .lexical import DEFAULT_FIELDS, tokenize

LENGTH_RELAXATION = 0.1
STMC1_EPSILON = 1e-9
STMC2_SIM_THRESHOLD = 0.5

AXIOM_NAMES = ("TFC1", "TFC3", "M-TDC", "LNC1", "TF-LNC", "LNC2", "STMC1", "STMC2")


class Preference(Enum):
    FIRST = "first"
    SECOND = "second"
    NONE = "none"

    def swapped(self) -> "Preference":
        if self is Preference.FIRST:
            return Preference.SECOND
        if self is Preference.SECOND:
            return Preference.FIRST
        return self


class PairDoc:
    """A document as seen by the axioms: per-field tokens plus tf table."""

    __slots__ = ("doc_id", "field_tokens", "tokens", "tf", "length")

    def __init__(self, doc_id: str, field_tokens: Mapping[str, Sequence[str]]):
        self.doc_id = doc_id
        self.field_tokens: dict[str, tuple[str, ...]] = {
            name: tuple(tokens) for name, tokens in field_tokens.items()
        }
        flat: list[str] = []
        for tokens in self.field_tokens.values():
            flat.extend(tokens)
        self.tokens = tuple(flat)
        self.tf = Counter(self.tokens)
        self.length = len(self.tokens)

    @classmethod
    def from_document(cls, doc: Document, fields: Sequence[str] = DEFAULT_FIELDS) -> "PairDoc":
        texts = {"title": doc.title, "body": doc.body}
        return cls(doc.doc_id, {name: tokenize(texts[name]) for name in fields})

    def concatenated(self, copies: int) -> "PairDoc":
        if copies < 1:
            raise ValidationError(f"copies must be >= 1, got {copies}")
        return PairDoc(
            self.doc_id,
            {name: tokens * copies for name, tokens in self.field_tokens.items()},
        )


@dataclass(frozen=True)
class DocPair:
    query_id: str
    query_tokens: tuple[str, ...]
    d1: PairDoc
    d2: PairDoc
    # concatenation factor for synthetic pairs; None marks a real pair
    copies: int | None = None

    def swapped(self) -> "DocPair":
        return DocPair(self.query_id, self.query_tokens, self.d2, self.d1, self.copies)


class TermStats:
    """Document frequencies over the axioms' view of a corpus."""

    def __init__(self, n_docs: int, df: Mapping[str, int]):
        self.n_docs = n_docs
        self._df = dict(df)
        self._idf_cache: dict[str, float] = {}

    @classmethod
    def from_corpus(cls, corpus: Corpus, fields: Sequence[str] = DEFAULT_FIELDS,
                    terms: Iterable[str] | None = None) -> "TermStats":
        """Count df for ``terms`` (or every term when None) over the view."""
        wanted = set(terms) if terms is not None else None
        texts = {"title": lambda d: d.title, "body": lambda d: d.body}
        df: dict[str, int] = {}
        for doc in corpus:
            seen: set[str] = set()
            for name in fields:
                seen.update(tokenize(texts[name](doc)))
            if wanted is not None:
                seen &= wanted
            for term in seen:
                df[term] = df.get(term, 0) + 1
        return cls(len(corpus), df)

    def df(self, term: str) -> int:
        return self._df.get(term, 0)

    def idf(self, term: str) -> float:
        if term not in self._idf_cache:
            df = self.df(term)
            self._idf_cache[term] = float(
                np.log(1.0 + (self.n_docs - df + 0.5) / (df + 0.5))
            )
        return self._idf_cache[term]


class TableSimilarity:
    """Symmetric similarity lookup; identical terms default to 1.0."""

    def __init__(self, table: Mapping[tuple[str, str], float]):
        self._table: dict[tuple[str, str], float] = {}
        for (a, b), value in table.items():
            self._table[(a, b)] = float(value)
            self._table[(b, a)] = float(value)

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return self._table.get((a, b), 1.0)
        return self._table.get((a, b), 0.0)


class WordVectors:
    """Cosine similarity over a precomputed word-vector file."""

    def __init__(self, vectors: Mapping[str, np.ndarray]):
        self._vectors: dict[str, np.ndarray] = {}
        for term, vector in vectors.items():
            norm = float(np.linalg.norm(vector))
            self._vectors[term] = vector / norm if norm > 0 else vector

    @classmethod
    def load(cls, path: str | Path) -> "WordVectors":
        path = Path(path)
        if not path.is_file():
            raise ValidationError(f"vector file not found: {path}")
        vectors: dict[str, np.ndarray] = {}
        dim: int | None = None
        with path.open("r", encoding="utf-8") as handle:
            for line_no, raw in enumerate(handle, start=1):
                parts = raw.split()
                if not parts:
                    continue
                term = parts[0]
                if term in vectors:
                    raise ParseError(str(path), line_no, f"duplicate term {term!r}")
                try:
                    values = np.array([float(x) for x in parts[1:]], dtype=float)
                except ValueError:
                    raise ParseError(str(path), line_no, "non-numeric vector component") from None
                if values.size == 0:
                    raise ParseError(str(path), line_no, f"term {term!r} has no vector")
                if dim is None:
                    dim = values.size
                elif values.size != dim:
                    raise ParseError(
                        str(path), line_no,
                        f"dimension mismatch: expected {dim}, got {values.size}",
                    )
                vectors[term] = values
        return cls(vectors)

    def similarity(self, a: str, b: str) -> float:
        va = self._vectors.get(a)
        vb = self._vectors.get(b)
        if va is None or vb is None:
            return 0.0
        return float(np.dot(va, vb))


# ---------------------------------------------------------------------------
# Preference functions
# ---------------------------------------------------------------------------


def _relaxed_equal(a: float, b: float, tolerance: float = LENGTH_RELAXATION) -> bool:
    return abs(a - b) <= tolerance * max(abs(a), abs(b))


def _query_tf_sum(query_terms: Iterable[str], doc: PairDoc) -> int:
    return sum(doc.tf.get(term, 0) for term in query_terms)


def _tfc1(pair: DocPair, stats, similarity) -> Preference:
    if not _relaxed_equal(pair.d1.length, pair.d2.length):
        return Preference.NONE
    terms = set(pair.query_tokens)
    s1 = _query_tf_sum(terms, pair.d1)
    s2 = _query_tf_sum(terms, pair.d2)
    if s1 > s2:
        return Preference.FIRST
    if s2 > s1:
        return Preference.SECOND
    return Preference.NONE


def _tfc3_direction(first: PairDoc, second: PairDoc, query_terms: Sequence[str],
                    stats: TermStats) -> bool:
    # first spreads the same mass over two query terms that second piles
    # onto one of them
    for t1 in query_terms:
        for t2 in query_terms:
            if t1 == t2:
                continue
            if not _relaxed_equal(stats.idf(t1), stats.idf(t2)):
                continue
            if (
                first.tf.get(t1, 0) > 0
                and first.tf.get(t2, 0) > 0
                and second.tf.get(t2, 0) == 0
                and second.tf.get(t1, 0) == first.tf.get(t1, 0) + first.tf.get(t2, 0)
            ):
                return True
    return False


def _tfc3(pair: DocPair, stats, similarity) -> Preference:
    if stats is None:
        raise DataError("TFC3 requires term statistics for idf")
    if not _relaxed_equal(pair.d1.length, pair.d2.length):
        return Preference.NONE
    terms = sorted(set(pair.query_tokens))
    forward = _tfc3_direction(pair.d1, pair.d2, terms, stats)
    backward = _tfc3_direction(pair.d2, pair.d1, terms, stats)
    if forward and not backward:
        return Preference.FIRST
    if backward and not forward:
        return Preference.SECOND
    return Preference.NONE


def _mtdc_direction(first: PairDoc, second: PairDoc, query_counts: Counter,
                    stats: TermStats) -> bool:
    # first has more of the rarer term; the two docs swap the counts
    for t1 in query_counts:
        for t2 in query_counts:
            if t1 == t2:
                continue
            if stats.idf(t1) < stats.idf(t2):
                continue
            if query_counts[t1] < query_counts[t2]:
                continue
            if (
                first.tf.get(t1, 0) == second.tf.get(t2, 0)
                and first.tf.get(t2, 0) == second.tf.get(t1, 0)
                and first.tf.get(t1, 0) > second.tf.get(t1, 0)
            ):
                return True
    return False


def _mtdc(pair: DocPair, stats, similarity) -> Preference:
    if stats is None:
        raise DataError("M-TDC requires term statistics for idf")
    if not _relaxed_equal(pair.d1.length, pair.d2.length):
        return Preference.NONE
    query_counts = Counter(pair.query_tokens)
    forward = _mtdc_direction(pair.d1, pair.d2, query_counts, stats)
    backward = _mtdc_direction(pair.d2, pair.d1, query_counts, stats)
    if forward and not backward:
        return Preference.FIRST
    if backward and not forward:
        return Preference.SECOND
    return Preference.NONE


def _lnc1(pair: DocPair, stats, similarity) -> Preference:
    for term in set(pair.query_tokens):
        if pair.d1.tf.get(term, 0) != pair.d2.tf.get(term, 0):
            return Preference.NONE
    if pair.d1.length < pair.d2.length:
        return Preference.FIRST
    if pair.d2.length < pair.d1.length:
        return Preference.SECOND
    return Preference.NONE


def _tflnc(pair: DocPair, stats, similarity) -> Preference:
    # one doc must equal the other plus extra copies of a single query term
    differing = [
        term
        for term in set(pair.d1.tf) | set(pair.d2.tf)
        if pair.d1.tf.get(term, 0) != pair.d2.tf.get(term, 0)
    ]
    if len(differing) != 1:
        return Preference.NONE
    term = differing[0]
    if term not in set(pair.query_tokens):
        return Preference.NONE
    if pair.d1.tf.get(term, 0) > pair.d2.tf.get(term, 0):
        return Preference.FIRST
    return Preference.SECOND


def _is_concatenation(bigger: PairDoc, smaller: PairDoc) -> bool:
    if smaller.length == 0 or bigger.length <= smaller.length:
        return False
    if bigger.length % smaller.length:
        return False
    copies = bigger.length // smaller.length
    if set(bigger.field_tokens) != set(smaller.field_tokens):
        return False
    return all(
        bigger.field_tokens[name] == smaller.field_tokens[name] * copies
        for name in smaller.field_tokens
    )


def _lnc2(pair: DocPair, stats=None, similarity=None) -> Preference:
    if pair.d1.tokens == pair.d2.tokens and pair.d1.field_tokens == pair.d2.field_tokens:
        return Preference.NONE
    if _is_concatenation(pair.d1, pair.d2):
        return Preference.FIRST
    if _is_concatenation(pair.d2, pair.d1):
        return Preference.SECOND
    return Preference.NONE


def _max_similarity(term: str, query_terms: Sequence[str], similarity) -> float:
    return max((similarity.similarity(term, q) for q in query_terms), default=0.0)


def _mean_max_similarity(doc: PairDoc, query_terms: Sequence[str], similarity) -> float:
    distinct = list(doc.tf)
    if not distinct:
        return 0.0
    total = sum(_max_similarity(term, query_terms, similarity) for term in distinct)
    return total / len(distinct)


def _stmc1(pair: DocPair, stats, similarity, cache: dict | None = None) -> Preference:
    if similarity is None:
        raise DataError("STMC1 requires a similarity provider")
    terms = sorted(set(pair.query_tokens))
    # stand aside whenever the raw query-term mass already separates the
    # docs; that difference belongs to TFC1
    if _query_tf_sum(terms, pair.d1) != _query_tf_sum(terms, pair.d2):
        return Preference.NONE

    def mean_for(doc: PairDoc) -> float:
        if cache is None:
            return _mean_max_similarity(doc, terms, similarity)
        key = (id(doc), pair.query_tokens)
        if key not in cache:
            cache[key] = _mean_max_similarity(doc, terms, similarity)
        return cache[key]

    m1 = mean_for(pair.d1)
    m2 = mean_for(pair.d2)
    if m1 - m2 > STMC1_EPSILON:
        return Preference.FIRST
    if m2 - m1 > STMC1_EPSILON:
        return Preference.SECOND
    return Preference.NONE


def _stmc2_direction(first: PairDoc, second: PairDoc,
                     query_terms: Sequence[str], similarity) -> bool:
    # first holds an actual query term; second only holds a lookalike and
    # is at least as long
    if second.length < first.length:
        return False
    present = [t for t in query_terms if first.tf.get(t, 0) >= 1]
    if not present or any(second.tf.get(t, 0) for t in query_terms):
        return False
    query_set = set(query_terms)
    for term in second.tf:
        if term in query_set:
            continue
        for t in present:
            if similarity.similarity(t, term) >= STMC2_SIM_THRESHOLD:
                return True
    return False


def _stmc2(pair: DocPair, stats, similarity) -> Preference:
    if similarity is None:
        raise DataError("STMC2 requires a similarity provider")
    terms = sorted(set(pair.query_tokens))
    if _stmc2_direction(pair.d1, pair.d2, terms, similarity):
        return Preference.FIRST
    if _stmc2_direction(pair.d2, pair.d1, terms, similarity):
        return Preference.SECOND
    return Preference.NONE


_AXIOMS: dict[str, Callable] = {
    "TFC1": _tfc1,
    "TFC3": _tfc3,
    "M-TDC": _mtdc,
    "LNC1": _lnc1,
    "TF-LNC": _tflnc,
    "LNC2": _lnc2,
    "STMC1": _stmc1,
    "STMC2": _stmc2,
}


def canonical_axiom(name: str) -> str:
    key = name.strip().upper().replace("_", "-")
    if key == "MTDC":
        key = "M-TDC"
    if key == "TFLNC":
        key = "TF-LNC"
    if key not in _AXIOMS:
        raise ValidationError(f"unknown axiom {name!r}; expected one of {AXIOM_NAMES}")
    return key


def axiom_preference(axiom: str, pair: DocPair, stats: TermStats | None = None,
                     similarity=None) -> Preference:
    """Evaluate one axiom on one pair; NoPreference when preconditions fail."""
    return _AXIOMS[canonical_axiom(axiom)](pair, stats, similarity)


# ---------------------------------------------------------------------------
# Pair generation
# ---------------------------------------------------------------------------


def lnc2_pairs(runs: Sequence[Run], corpus: Corpus, queries: QuerySet,
               sample_size: int = 250, copies: Sequence[int] = (1, 2, 3, 4),
               seed: int = 0, fields: Sequence[str] = DEFAULT_FIELDS,
               top_k: int = 10) -> list[DocPair]:
    """Synthetic self-concatenation pairs from sampled retrieved documents.

    Samples uniformly without replacement from the union of all runs' top-k
    (query, doc) pairs; each sample yields one pair per concatenation
    factor, with the concatenation as the first document.
    """
    if not runs:
        raise ValidationError("lnc2_pairs needs at least one run")
    candidates: set[tuple[str, str]] = set()
    for run in runs:
        for query_id in run.query_ids():
            for entry in run.top(query_id, top_k):
                candidates.add((query_id, entry.doc_id))
    ordered = sorted(candidates)
    rng = random.Random(seed)
    if len(ordered) <= sample_size:
        if len(ordered) < sample_size:
            warnings.warn(
                f"only {len(ordered)} candidate pairs available, "
                f"requested {sample_size}; using all"
            )
        sampled = ordered
    else:
        sampled = sorted(rng.sample(ordered, sample_size))

    pairs: list[DocPair] = []
    for query_id, doc_id in sampled:
        query_tokens = tuple(tokenize(queries.get(query_id).text))
        original = PairDoc.from_document(corpus.get(doc_id), fields)
        for factor in copies:
            pairs.append(
                DocPair(query_id, query_tokens, original.concatenated(factor),
                        original, copies=factor)
            )
    return pairs


def real_pairs(run: Run, corpus: Corpus, queries: QuerySet, k: int = 50,
               fields: Sequence[str] = DEFAULT_FIELDS) -> list[DocPair]:
    """All unordered top-k pairs per query, higher-ranked document first."""
    cache: dict[str, PairDoc] = {}

    def doc(doc_id: str) -> PairDoc:
        if doc_id not in cache:
            cache[doc_id] = PairDoc.from_document(corpus.get(doc_id), fields)
        return cache[doc_id]

    pairs: list[DocPair] = []
    for query_id in run.query_ids():
        query_tokens = tuple(tokenize(queries.get(query_id).text))
        top = run.top(query_id, k)
        for i in range(len(top)):
            for j in range(i + 1, len(top)):
                pairs.append(
                    DocPair(query_id, query_tokens,
                            doc(top[i].doc_id), doc(top[j].doc_id))
                )
    return pairs


# ---------------------------------------------------------------------------
# Agreement
# ---------------------------------------------------------------------------


@dataclass
class AgreementRow:
    axiom: str
    model: str
    applicable: int
    agreements: int
    skipped: int = 0

    @property
    def pct(self) -> float:
        return 100.0 * self.agreements / self.applicable if self.applicable else 0.0


Scorer = Callable[[Sequence[str], Mapping[str, Sequence[str]]], float]


def agreement(model: Run | Scorer, pairs: Iterable[DocPair], axiom: str,
              stats: TermStats | None = None, similarity=None,
              model_tag: str | None = None) -> AgreementRow:
    """Fraction of applicable pairs the model orders like the axiom.

    A Run model orders a real pair by rank; pairs with a document missing
    from the ranking are skipped. A scorer (callable) orders by score and
    is required for synthetic LNC2 pairs, where a tie counts as agreement
    because the constraint only forbids the concatenation scoring lower.
    """
    key = canonical_axiom(axiom)
    is_run = isinstance(model, Run)
    tag = model_tag or (model.tag if is_run else "scorer")
    row = AgreementRow(axiom=key, model=tag, applicable=0, agreements=0)
    ranks_cache: dict[str, dict[str, int]] = {}
    stmc1_cache: dict = {}

    for pair in pairs:
        if key == "LNC2":
            if pair.copies is None:
                continue
            if is_run:
                raise DataError(
                    "LNC2 agreement needs a scorer; synthetic documents "
                    "do not appear in rankings"
                )
            preference = _lnc2(pair)
            if preference is Preference.NONE and pair.d1.tokens != pair.d2.tokens:
                continue
            s1 = model(pair.query_tokens, pair.d1.field_tokens)
            s2 = model(pair.query_tokens, pair.d2.field_tokens)
            row.applicable += 1
            high, low = (s2, s1) if preference is Preference.SECOND else (s1, s2)
            if high >= low:
                row.agreements += 1
            continue

        if key == "STMC1":
            preference = _stmc1(pair, stats, similarity, cache=stmc1_cache)
        else:
            preference = _AXIOMS[key](pair, stats, similarity)
        if preference is Preference.NONE:
            continue
        if is_run:
            if pair.query_id not in ranks_cache:
                ranks_cache[pair.query_id] = model.ranks(pair.query_id)
            ranks = ranks_cache[pair.query_id]
            r1 = ranks.get(pair.d1.doc_id)
            r2 = ranks.get(pair.d2.doc_id)
            if r1 is None or r2 is None:
                row.skipped += 1
                continue
            model_first = r1 < r2
        else:
            s1 = model(pair.query_tokens, pair.d1.field_tokens)
            s2 = model(pair.query_tokens, pair.d2.field_tokens)
            if s1 == s2:
                row.applicable += 1
                continue
            model_first = s1 > s2
        row.applicable += 1
        if model_first == (preference is Preference.FIRST):
            row.agreements += 1
    return row
