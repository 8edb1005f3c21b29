"""Shared fixture builders for small in-memory collections."""

from __future__ import annotations

import pytest

from rejudge.collection import Corpus, Document, Qrels, Query, QuerySet, Run


def make_corpus(bodies: dict[str, str], titles: dict[str, str] | None = None) -> Corpus:
    titles = titles or {}
    return Corpus(
        Document(doc_id, titles.get(doc_id, ""), body)
        for doc_id, body in bodies.items()
    )


def make_queries(texts: dict[str, str]) -> QuerySet:
    return QuerySet(Query(query_id, text) for query_id, text in texts.items())


def make_qrels(entries: dict[tuple[str, str], int]) -> Qrels:
    return Qrels(entries)


def make_run(tag: str, rankings: dict[str, list[tuple[str, float]]]) -> Run:
    return Run.from_scores(tag, rankings)


@pytest.fixture
def tiny_corpus() -> Corpus:
    return make_corpus(
        {
            "d1": "social security should be privatized for many reasons",
            "d2": "bottled water is wasteful",
            "d3": "pass",
        },
        titles={
            "d1": "social security should be privatized",
            "d2": "bottled water should be banned",
            "d3": "social security",
        },
    )
