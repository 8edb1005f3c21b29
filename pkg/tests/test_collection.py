"""Parser/writer contracts: bit-exact formats and round-trip fixed points."""

from __future__ import annotations

import json

import pytest

from rejudge.collection import (
    Document,
    Qrels,
    Run,
    parse_corpus,
    parse_qrels,
    parse_queries,
    parse_run,
    write_corpus,
    write_qrels,
    write_queries,
    write_run,
)
from rejudge.errors import DataError, ParseError, ValidationError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


class TestParseCorpus:
    def test_field_mapping(self, tmp_path):
        path = _write(tmp_path / "c.jsonl", '{"_id":"d1","title":"t","text":"b"}\n')
        corpus = parse_corpus(path)
        doc = corpus.get("d1")
        assert (doc.doc_id, doc.title, doc.body) == ("d1", "t", "b")

    def test_empty_file_is_empty_corpus(self, tmp_path):
        corpus = parse_corpus(_write(tmp_path / "c.jsonl", ""))
        assert len(corpus) == 0

    def test_duplicate_id_names_id_and_line(self, tmp_path):
        lines = [
            json.dumps({"_id": f"d{i}", "title": "", "text": "x"}) for i in range(1, 12)
        ]
        lines.append(json.dumps({"_id": "d3", "title": "", "text": "x"}))  # line 12
        path = _write(tmp_path / "c.jsonl", "\n".join(lines) + "\n")
        with pytest.raises(ParseError) as err:
            parse_corpus(path)
        assert "d3" in str(err.value) and ":12:" in str(err.value)

    def test_count_equals_line_count(self, tmp_path):
        lines = [json.dumps({"_id": f"d{i}", "title": "", "text": "w " * i}) for i in range(40)]
        corpus = parse_corpus(_write(tmp_path / "c.jsonl", "\n".join(lines) + "\n"))
        assert len(corpus) == 40

    def test_malformed_json_names_line(self, tmp_path):
        path = _write(tmp_path / "c.jsonl", '{"_id":"a","title":"","text":""}\n{oops\n')
        with pytest.raises(ParseError) as err:
            parse_corpus(path)
        assert ":2:" in str(err.value)

    def test_metadata_carried_opaquely(self, tmp_path):
        path = _write(
            tmp_path / "c.jsonl",
            '{"_id":"d1","title":"t","text":"b","metadata":{"url":"http://x"}}\n',
        )
        assert parse_corpus(path).get("d1").metadata == {"url": "http://x"}

    def test_missing_file_is_validation_error(self, tmp_path):
        with pytest.raises(ValidationError):
            parse_corpus(tmp_path / "nope.jsonl")


class TestParseQueries:
    def test_basic(self, tmp_path):
        path = _write(
            tmp_path / "q.jsonl",
            '{"_id":"5","text":"Should social security be privatized?"}\n',
        )
        queries = parse_queries(path)
        assert queries.get("5").text == "Should social security be privatized?"

    def test_empty_file(self, tmp_path):
        assert len(parse_queries(_write(tmp_path / "q.jsonl", ""))) == 0

    def test_duplicate_id(self, tmp_path):
        path = _write(
            tmp_path / "q.jsonl",
            '{"_id":"1","text":"a"}\n{"_id":"1","text":"b"}\n',
        )
        with pytest.raises(ParseError):
            parse_queries(path)


class TestParseQrels:
    def test_single_entry(self, tmp_path):
        qrels = parse_qrels(_write(tmp_path / "q.tsv", "q1\td1\t2\n"))
        assert qrels.grade("q1", "d1") == 2 and len(qrels) == 1

    def test_header_skipped(self, tmp_path):
        qrels = parse_qrels(
            _write(tmp_path / "q.tsv", "query-id\tcorpus-id\tscore\nq1\td1\t1\n")
        )
        assert len(qrels) == 1

    def test_grade_out_of_range(self, tmp_path):
        with pytest.raises(ParseError) as err:
            parse_qrels(_write(tmp_path / "q.tsv", "q1\td1\t3\n"))
        assert "3" in str(err.value)

    def test_duplicate_pair(self, tmp_path):
        with pytest.raises(ParseError):
            parse_qrels(_write(tmp_path / "q.tsv", "q1\td1\t1\nq1\td1\t2\n"))


class TestParseRun:
    def test_grouping_and_order(self, tmp_path):
        path = _write(
            tmp_path / "r.run", "q1 Q0 d2 1 3.5 bm25\nq1 Q0 d7 2 1.0 bm25\n"
        )
        run = parse_run(path)
        assert [e.doc_id for e in run.top("q1", 10)] == ["d2", "d7"]
        assert run.tag == "bm25"

    def test_rank_column_ignored_score_wins(self, tmp_path):
        path = _write(
            tmp_path / "r.run", "q1 Q0 low 1 1.0 t\nq1 Q0 high 2 9.0 t\n"
        )
        assert [e.doc_id for e in parse_run(path).top("q1", 2)] == ["high", "low"]

    def test_tie_break_doc_id_ascending(self, tmp_path):
        path = _write(tmp_path / "r.run", "q1 Q0 dB 1 2.0 t\nq1 Q0 dA 2 2.0 t\n")
        assert [e.doc_id for e in parse_run(path).top("q1", 2)] == ["dA", "dB"]

    def test_non_numeric_score(self, tmp_path):
        with pytest.raises(ParseError):
            parse_run(_write(tmp_path / "r.run", "q1 Q0 d1 1 abc t\n"))

    def test_non_numeric_rank(self, tmp_path):
        with pytest.raises(ParseError):
            parse_run(_write(tmp_path / "r.run", "q1 Q0 d1 one 2.0 t\n"))

    def test_duplicate_entry(self, tmp_path):
        with pytest.raises(ParseError):
            parse_run(
                _write(tmp_path / "r.run", "q1 Q0 d1 1 2.0 t\nq1 Q0 d1 2 1.0 t\n")
            )

    def test_run_invariants_hold(self, tmp_path):
        path = _write(
            tmp_path / "r.run",
            "q2 Q0 a 9 0.25 t\nq2 Q0 b 9 0.5 t\nq1 Q0 c 1 1.5 t\nq1 Q0 d 7 1.5 t\n",
        )
        run = parse_run(path)
        for query_id in run.query_ids():
            entries = run.rankings[query_id]
            doc_ids = [e.doc_id for e in entries]
            assert len(set(doc_ids)) == len(doc_ids)
            scores = [e.score for e in entries]
            assert scores == sorted(scores, reverse=True)
            assert list(run.ranks(query_id).values()) == list(range(1, len(entries) + 1))


class TestRoundTrips:
    """parse -> write -> parse is a fixed point for all four formats."""

    def test_corpus(self, tmp_path):
        original = tmp_path / "c.jsonl"
        _write(
            original,
            '{"_id":"d1","title":"Ti","text":"one two"}\n'
            '{"_id":"d2","title":"","text":"drei","metadata":{"k":1}}\n',
        )
        first = parse_corpus(original)
        copy = tmp_path / "c2.jsonl"
        write_corpus(first, copy)
        assert parse_corpus(copy) == first

    def test_queries(self, tmp_path):
        original = _write(
            tmp_path / "q.jsonl", '{"_id":"1","text":"a?"}\n{"_id":"2","text":"b"}\n'
        )
        first = parse_queries(original)
        copy = tmp_path / "q2.jsonl"
        write_queries(first, copy)
        assert parse_queries(copy) == first

    def test_qrels(self, tmp_path):
        original = _write(tmp_path / "q.tsv", "q1\td1\t2\nq1\td2\t0\nq2\td1\t1\n")
        first = parse_qrels(original)
        copy = tmp_path / "q2.tsv"
        write_qrels(first, copy)
        assert parse_qrels(copy) == first

    def test_run_three_queries(self, tmp_path):
        original = _write(
            tmp_path / "r.run",
            "q1 Q0 a 1 3.25 t\nq1 Q0 b 2 1.0 t\n"
            "q2 Q0 c 1 0.125 t\nq3 Q0 a 1 7.5 t\nq3 Q0 c 2 7.5 t\n",
        )
        first = parse_run(original)
        copy = tmp_path / "r2.run"
        write_run(first, copy)
        assert parse_run(copy) == first

    def test_run_full_precision_scores(self, tmp_path):
        # scores separated by less than any fixed decimal rounding
        run = Run.from_scores("t", {"q": [("a", 1.0 + 1e-12), ("b", 1.0)]})
        path = tmp_path / "r.run"
        write_run(run, path)
        assert parse_run(path) == run


class TestTypeInvariants:
    def test_document_requires_id(self):
        with pytest.raises(DataError):
            Document("", "t", "b")

    def test_qrels_rejects_bad_grade(self):
        with pytest.raises(DataError):
            Qrels({("q", "d"): 5})

    def test_run_rejects_duplicate_docs(self):
        with pytest.raises(DataError):
            Run.from_scores("t", {"q": [("d", 1.0), ("d", 2.0)]})

    def test_run_rejects_non_finite_scores(self):
        with pytest.raises(DataError):
            Run.from_scores("t", {"q": [("d", float("nan"))]})

    def test_qrels_grade_counts(self):
        qrels = Qrels({("q", "a"): 0, ("q", "b"): 2, ("r", "a"): 2})
        assert qrels.grade_counts() == {0: 1, 1: 0, 2: 2}
