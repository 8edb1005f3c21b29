"""Data model and parsers/writers for corpora, queries, qrels, and runs.

File formats handled here, bit-exact:

- corpus: JSONL, one object per line with ``_id``, ``title``, ``text`` and
  an optional ``metadata`` object (carried opaquely, never interpreted).
- queries: JSONL with ``_id`` and ``text``.
- qrels: TSV ``query-id<TAB>corpus-id<TAB>score`` with grades in {0, 1, 2};
  an optional header line starting with ``query-id`` is skipped.
- run: 6 whitespace-separated columns ``qid Q0 docid rank score tag``.

Run normalization: the rank column of an input run is ignored. Ordering
authority is (score desc, doc_id asc) and ranks are rewritten 1..n, which
mirrors trec_eval and keeps downstream metrics deterministic. Duplicate
qrels pairs and duplicate run (qid, docid) entries are hard errors rather
than last-wins; silent overwrites would corrupt agreement statistics.

All parsed structures are immutable in practice (transforms return new
objects), so they are safe to share across threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import DataError, ParseError, ValidationError

GRADES = (0, 1, 2)


@dataclass(frozen=True)
class Document:
    """One corpus entry: an argument conclusion (title) plus premise (body)."""

    doc_id: str
    title: str
    body: str
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if not self.doc_id:
            raise DataError("document with empty doc_id")


@dataclass(frozen=True)
class Query:
    query_id: str
    text: str

    def __post_init__(self):
        if not self.query_id:
            raise DataError("query with empty query_id")
        if not self.text:
            raise DataError(f"query {self.query_id!r} has empty text")


class Corpus:
    """Ordered, id-unique collection of documents."""

    def __init__(self, documents: Iterable[Document] = ()):
        self._docs: dict[str, Document] = {}
        for doc in documents:
            if doc.doc_id in self._docs:
                raise DataError(f"duplicate doc_id {doc.doc_id!r}")
            self._docs[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._docs.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def get(self, doc_id: str) -> Document:
        try:
            return self._docs[doc_id]
        except KeyError:
            raise DataError(f"unknown doc_id {doc_id!r}") from None

    def doc_ids(self) -> list[str]:
        return list(self._docs)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        return self._docs == other._docs


class QuerySet:
    """Ordered, id-unique collection of queries."""

    def __init__(self, queries: Iterable[Query] = ()):
        self._queries: dict[str, Query] = {}
        for query in queries:
            if query.query_id in self._queries:
                raise DataError(f"duplicate query_id {query.query_id!r}")
            self._queries[query.query_id] = query

    def __len__(self) -> int:
        return len(self._queries)

    def __iter__(self) -> Iterator[Query]:
        return iter(self._queries.values())

    def __contains__(self, query_id: str) -> bool:
        return query_id in self._queries

    def get(self, query_id: str) -> Query:
        try:
            return self._queries[query_id]
        except KeyError:
            raise DataError(f"unknown query_id {query_id!r}") from None

    def query_ids(self) -> list[str]:
        return list(self._queries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuerySet):
            return NotImplemented
        return self._queries == other._queries


class Qrels:
    """Graded relevance judgments keyed by (query_id, doc_id).

    Exactly one grade per pair, grades restricted to {0, 1, 2}.
    """

    def __init__(self, entries: Mapping[tuple[str, str], int] | None = None):
        self._entries: dict[tuple[str, str], int] = {}
        self._by_query: dict[str, dict[str, int]] = {}
        if entries:
            for (query_id, doc_id), grade in entries.items():
                self.add(query_id, doc_id, grade)

    def add(self, query_id: str, doc_id: str, grade: int) -> None:
        if grade not in GRADES:
            raise DataError(
                f"grade {grade!r} for ({query_id!r}, {doc_id!r}) outside {set(GRADES)}"
            )
        key = (query_id, doc_id)
        if key in self._entries:
            raise DataError(f"duplicate qrels pair ({query_id!r}, {doc_id!r})")
        self._entries[key] = grade
        self._by_query.setdefault(query_id, {})[doc_id] = grade

    def grade(self, query_id: str, doc_id: str) -> int | None:
        return self._entries.get((query_id, doc_id))

    def is_judged(self, query_id: str, doc_id: str) -> bool:
        return (query_id, doc_id) in self._entries

    def for_query(self, query_id: str) -> dict[str, int]:
        return dict(self._by_query.get(query_id, {}))

    def query_ids(self) -> list[str]:
        return list(self._by_query)

    def items(self) -> Iterator[tuple[tuple[str, str], int]]:
        return iter(self._entries.items())

    def grade_counts(self) -> dict[int, int]:
        counts = {grade: 0 for grade in GRADES}
        for grade in self._entries.values():
            counts[grade] += 1
        return counts

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Qrels):
            return NotImplemented
        return self._entries == other._entries


@dataclass(frozen=True)
class ScoredDoc:
    doc_id: str
    score: float


class Run:
    """A model's ranked output per query.

    Within a query, ranks are 1..n with no gaps, doc_ids are distinct, and
    scores are non-increasing with rank. Both invariants are established by
    ``from_scores`` and hold for every accepted input.
    """

    def __init__(self, tag: str, rankings: Mapping[str, Sequence[ScoredDoc]]):
        self.tag = tag
        self.rankings: dict[str, tuple[ScoredDoc, ...]] = {
            query_id: tuple(entries) for query_id, entries in rankings.items()
        }

    @classmethod
    def from_scores(
        cls, tag: str, scores: Mapping[str, Iterable[tuple[str, float]]]
    ) -> "Run":
        """Build a normalized run from per-query (doc_id, score) pairs."""
        rankings: dict[str, tuple[ScoredDoc, ...]] = {}
        for query_id, pairs in scores.items():
            seen: set[str] = set()
            entries = []
            for doc_id, score in pairs:
                if doc_id in seen:
                    raise DataError(
                        f"duplicate (query {query_id!r}, doc {doc_id!r}) in run {tag!r}"
                    )
                score = float(score)
                if not math.isfinite(score):
                    raise DataError(
                        f"non-finite score for (query {query_id!r}, doc {doc_id!r})"
                    )
                seen.add(doc_id)
                entries.append(ScoredDoc(doc_id, score))
            entries.sort(key=lambda e: (-e.score, e.doc_id))
            rankings[query_id] = tuple(entries)
        return cls(tag, rankings)

    def query_ids(self) -> list[str]:
        return list(self.rankings)

    def top(self, query_id: str, k: int) -> tuple[ScoredDoc, ...]:
        return self.rankings.get(query_id, ())[:k]

    def ranks(self, query_id: str) -> dict[str, int]:
        """doc_id -> 1-based rank for one query."""
        return {
            entry.doc_id: rank
            for rank, entry in enumerate(self.rankings.get(query_id, ()), start=1)
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Run):
            return NotImplemented
        return self.tag == other.tag and self.rankings == other.rankings


# ---------------------------------------------------------------------------
# Parsers
# ---------------------------------------------------------------------------


def _open_checked(path: str | Path):
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"input file not found: {path}")
    return path.open("r", encoding="utf-8")


def _parse_jsonl(path: str | Path, required: Sequence[str]):
    """Yield (line_no, object) for each JSONL line, checking required keys."""
    with _open_checked(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), line_no, f"malformed JSON: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise ParseError(str(path), line_no, "expected a JSON object")
            for key in required:
                if key not in obj:
                    raise ParseError(str(path), line_no, f"missing field {key!r}")
            yield line_no, obj


def parse_corpus(path: str | Path) -> Corpus:
    """Parse a JSONL corpus file; titles and bodies kept verbatim."""
    corpus = Corpus()
    for line_no, obj in _parse_jsonl(path, ("_id", "title", "text")):
        doc_id = str(obj["_id"])
        if not doc_id:
            raise ParseError(str(path), line_no, "empty _id")
        if doc_id in corpus:
            raise ParseError(str(path), line_no, f"duplicate doc_id {doc_id!r}")
        metadata = obj.get("metadata") or {}
        if not isinstance(metadata, dict):
            raise ParseError(str(path), line_no, "metadata must be a JSON object")
        doc = Document(
            doc_id=doc_id,
            title=str(obj["title"]),
            body=str(obj["text"]),
            metadata=metadata,
        )
        corpus._docs[doc.doc_id] = doc
    return corpus


def parse_queries(path: str | Path) -> QuerySet:
    queries = QuerySet()
    for line_no, obj in _parse_jsonl(path, ("_id", "text")):
        query_id = str(obj["_id"])
        if not query_id:
            raise ParseError(str(path), line_no, "empty _id")
        if query_id in queries:
            raise ParseError(str(path), line_no, f"duplicate query_id {query_id!r}")
        text = str(obj["text"])
        if not text:
            raise ParseError(str(path), line_no, f"query {query_id!r} has empty text")
        queries._queries[query_id] = Query(query_id, text)
    return queries


def parse_qrels(path: str | Path) -> Qrels:
    qrels = Qrels()
    with _open_checked(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line_no == 1 and line.startswith("query-id"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    str(path), line_no, f"expected 3 tab-separated columns, got {len(parts)}"
                )
            query_id, doc_id, grade_str = parts
            try:
                grade = int(grade_str)
            except ValueError:
                raise ParseError(str(path), line_no, f"non-integer grade {grade_str!r}") from None
            if grade not in GRADES:
                raise ParseError(str(path), line_no, f"grade {grade} outside {set(GRADES)}")
            if qrels.is_judged(query_id, doc_id):
                raise ParseError(
                    str(path), line_no, f"duplicate qrels pair ({query_id!r}, {doc_id!r})"
                )
            qrels.add(query_id, doc_id, grade)
    return qrels


def parse_run(path: str | Path) -> Run:
    """Parse a 6-column run file and normalize it (rank column ignored)."""
    tag = ""
    scores: dict[str, list[tuple[str, float]]] = {}
    seen: set[tuple[str, str]] = set()
    with _open_checked(path) as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 6:
                raise ParseError(
                    str(path), line_no, f"expected 6 whitespace-separated columns, got {len(parts)}"
                )
            query_id, _, doc_id, rank_str, score_str, line_tag = parts
            try:
                int(rank_str)
            except ValueError:
                raise ParseError(str(path), line_no, f"non-numeric rank {rank_str!r}") from None
            try:
                score = float(score_str)
            except ValueError:
                raise ParseError(str(path), line_no, f"non-numeric score {score_str!r}") from None
            if not math.isfinite(score):
                raise ParseError(str(path), line_no, f"non-finite score {score_str!r}")
            if (query_id, doc_id) in seen:
                raise ParseError(
                    str(path), line_no, f"duplicate run entry ({query_id!r}, {doc_id!r})"
                )
            seen.add((query_id, doc_id))
            if not tag:
                tag = line_tag
            scores.setdefault(query_id, []).append((doc_id, score))
    return Run.from_scores(tag, scores)


# ---------------------------------------------------------------------------
# Writers (parse -> write -> parse is a fixed point for all four formats)
# ---------------------------------------------------------------------------


def _check_id(value: str, what: str) -> str:
    if not value or any(ch.isspace() for ch in value):
        raise DataError(f"{what} {value!r} is empty or contains whitespace")
    return value


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for doc in corpus:
            obj: dict[str, object] = {"_id": doc.doc_id, "title": doc.title, "text": doc.body}
            if doc.metadata:
                obj["metadata"] = doc.metadata
            handle.write(json.dumps(obj, ensure_ascii=False) + "\n")


def write_queries(queries: QuerySet, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for query in queries:
            handle.write(
                json.dumps({"_id": query.query_id, "text": query.text}, ensure_ascii=False) + "\n"
            )


def qrels_to_tsv(qrels: Qrels) -> str:
    lines = ["query-id\tcorpus-id\tscore"]
    for (query_id, doc_id), grade in sorted(qrels.items()):
        lines.append(f"{query_id}\t{doc_id}\t{grade}")
    return "\n".join(lines) + "\n"


def write_qrels(qrels: Qrels, path: str | Path) -> None:
    Path(path).write_text(qrels_to_tsv(qrels), encoding="utf-8")


def write_run(run: Run, path: str | Path) -> None:
    """Write the standard 6-column format; scores keep full float precision."""
    tag = run.tag or "run"
    _check_id(tag, "run tag")
    with Path(path).open("w", encoding="utf-8") as handle:
        for query_id in sorted(run.rankings):
            _check_id(query_id, "query_id")
            for rank, entry in enumerate(run.rankings[query_id], start=1):
                _check_id(entry.doc_id, "doc_id")
                handle.write(f"{query_id} Q0 {entry.doc_id} {rank} {entry.score!r} {tag}\n")
