"""Apply precomputed document expansions and summary replacements.

Generation happens out of process (a query-generation model for
expansions, an abstractive summarizer for replacements); the JSONL files
are the contract:

- expansions: ``{"_id": ..., "queries": ["...", ...]}`` per line
- summaries:  ``{"_id": ..., "summary": "..."}`` per line

Expansions append to the body with single-space joins and no
deduplication; repeated generated queries are the intended term-weighting
effect. Summaries replace the body outright. Titles are never touched by
either transform.
"""

from __future__ import annotations

from pathlib import Path

from .collection import Corpus, Document, _parse_jsonl
from .errors import DataError, ParseError


def parse_expansions(path: str | Path) -> dict[str, list[str]]:
    expansions: dict[str, list[str]] = {}
    for line_no, obj in _parse_jsonl(path, ("_id", "queries")):
        doc_id = str(obj["_id"])
        if doc_id in expansions:
            raise ParseError(str(path), line_no, f"duplicate _id {doc_id!r}")
        queries = obj["queries"]
        if not isinstance(queries, list) or not all(isinstance(q, str) for q in queries):
            raise ParseError(str(path), line_no, "'queries' must be a list of strings")
        expansions[doc_id] = queries
    return expansions


def parse_summaries(path: str | Path) -> dict[str, str]:
    summaries: dict[str, str] = {}
    for line_no, obj in _parse_jsonl(path, ("_id", "summary")):
        doc_id = str(obj["_id"])
        if doc_id in summaries:
            raise ParseError(str(path), line_no, f"duplicate _id {doc_id!r}")
        summary = obj["summary"]
        if not isinstance(summary, str) or not summary:
            raise ParseError(str(path), line_no, "'summary' must be a non-empty string")
        summaries[doc_id] = summary
    return summaries


def _check_ids_known(corpus: Corpus, doc_ids, what: str) -> None:
    for doc_id in doc_ids:
        if doc_id not in corpus:
            raise DataError(f"{what} references unknown doc_id {doc_id!r}")


def apply_expansions(corpus: Corpus, expansions: dict[str, list[str]]) -> Corpus:
    """Append generated queries to each listed document's body."""
    _check_ids_known(corpus, expansions, "expansion file")

    def expand(doc: Document) -> Document:
        queries = expansions.get(doc.doc_id)
        if not queries:
            return doc
        return Document(
            doc.doc_id, doc.title, doc.body + " " + " ".join(queries), doc.metadata
        )

    return Corpus(expand(doc) for doc in corpus)


def apply_summaries(corpus: Corpus, summaries: dict[str, str]) -> Corpus:
    """Replace each listed document's body with its summary."""
    _check_ids_known(corpus, summaries, "summary file")

    def replace(doc: Document) -> Document:
        summary = summaries.get(doc.doc_id)
        if summary is None:
            return doc
        return Document(doc.doc_id, doc.title, summary, doc.metadata)

    return Corpus(replace(doc) for doc in corpus)
