"""Axiom preference functions, pair generation, and agreement tallies."""

from __future__ import annotations

import random

import pytest

from rejudge.axioms import (
    AXIOM_NAMES,
    DocPair,
    PairDoc,
    Preference,
    TableSimilarity,
    TermStats,
    WordVectors,
    agreement,
    axiom_preference,
    canonical_axiom,
    lnc2_pairs,
    real_pairs,
)
from rejudge.collection import Run
from rejudge.errors import DataError, ValidationError
from rejudge.lexical import Bm25Params, build_index, score_synthetic
from tests.conftest import make_corpus, make_queries, make_run


def pair_of(query, d1_tokens, d2_tokens, copies=None, query_id="q"):
    return DocPair(
        query_id,
        tuple(query),
        PairDoc("d1", {"body": d1_tokens}),
        PairDoc("d2", {"body": d2_tokens}),
        copies=copies,
    )


SIM = TableSimilarity(
    {
        ("water", "liquid"): 0.8,
        ("water", "drink"): 0.6,
        ("water", "rock"): 0.1,
        ("water", "stone"): 0.0,
    }
)

STATS_EQUAL_IDF = TermStats(10, {"t1": 3, "t2": 3})
STATS_T1_RARER = TermStats(10, {"t1": 1, "t2": 5})


class TestPreferences:
    def test_tfc1_higher_tf_at_equal_length(self):
        pair = pair_of(
            ["water"],
            ["water", "water", "water", "x"],
            ["water", "x", "y", "z"],
        )
        assert axiom_preference("TFC1", pair) is Preference.FIRST

    def test_tfc1_requires_relaxed_equal_length(self):
        pair = pair_of(["water"], ["water"] * 3, ["water", "x", "y", "z", "w", "v"])
        assert axiom_preference("TFC1", pair) is Preference.NONE

    def test_tfc3_prefers_more_distinct_terms(self):
        pair = pair_of(
            ["t1", "t2"],
            ["t1", "t2", "x", "y"],
            ["t1", "t1", "x", "y"],
        )
        assert axiom_preference("TFC3", pair, stats=STATS_EQUAL_IDF) is Preference.FIRST
        assert axiom_preference("TFC3", pair.swapped(), stats=STATS_EQUAL_IDF) \
            is Preference.SECOND

    def test_tfc3_requires_equal_idf(self):
        pair = pair_of(
            ["t1", "t2"],
            ["t1", "t2", "x", "y"],
            ["t1", "t1", "x", "y"],
        )
        assert axiom_preference("TFC3", pair, stats=STATS_T1_RARER) is Preference.NONE

    def test_mtdc_prefers_mass_on_rarer_term(self):
        pair = pair_of(
            ["t1", "t2"],
            ["t1", "t1", "t2", "x"],
            ["t1", "t2", "t2", "x"],
        )
        assert axiom_preference("M-TDC", pair, stats=STATS_T1_RARER) is Preference.FIRST

    def test_lnc1_prefers_shorter_at_equal_query_tf(self):
        pair = pair_of(
            ["q"],
            ["q", "a"],
            ["q", "a", "n1", "n2", "n3", "n4", "n5"],
        )
        assert axiom_preference("LNC1", pair) is Preference.FIRST

    def test_lnc1_no_preference_when_query_tf_differs(self):
        pair = pair_of(["q"], ["q", "a"], ["q", "q", "a", "b", "c", "d", "e"])
        assert axiom_preference("LNC1", pair) is Preference.NONE

    def test_tflnc_extra_query_term_occurrences(self):
        pair = pair_of(["q"], ["q", "q", "q", "a", "b"], ["q", "a", "b"])
        assert axiom_preference("TF-LNC", pair) is Preference.FIRST

    def test_tflnc_rejects_extra_nonquery_term(self):
        pair = pair_of(["q"], ["q", "a", "a", "b"], ["q", "a", "b"])
        assert axiom_preference("TF-LNC", pair) is Preference.NONE

    def test_lnc2_detects_concatenation_side(self):
        original = ["a", "a", "b", "b"]
        pair = pair_of(["a"], original * 2, original, copies=2)
        assert axiom_preference("LNC2", pair) is Preference.FIRST
        assert axiom_preference("LNC2", pair.swapped()) is Preference.SECOND

    def test_stmc1_prefers_similar_terms(self):
        pair = pair_of(["water"], ["liquid", "drink"], ["rock", "stone"])
        assert axiom_preference("STMC1", pair, similarity=SIM) is Preference.FIRST

    def test_stmc1_stands_aside_when_query_mass_differs(self):
        pair = pair_of(["water"], ["water", "liquid"], ["rock", "stone"])
        assert axiom_preference("STMC1", pair, similarity=SIM) is Preference.NONE

    def test_stmc2_prefers_real_query_term_over_lookalike(self):
        pair = pair_of(["water"], ["water", "x"], ["liquid", "y", "z"])
        assert axiom_preference("STMC2", pair, similarity=SIM) is Preference.FIRST
        assert axiom_preference("STMC2", pair.swapped(), similarity=SIM) \
            is Preference.SECOND

    def test_stmc2_requires_second_doc_at_least_as_long(self):
        pair = pair_of(["water"], ["water", "x", "y", "z"], ["liquid"])
        assert axiom_preference("STMC2", pair, similarity=SIM) is Preference.NONE

    def test_stmc_axioms_need_similarity(self):
        pair = pair_of(["water"], ["a"], ["b"])
        with pytest.raises(DataError):
            axiom_preference("STMC1", pair)
        with pytest.raises(DataError):
            axiom_preference("STMC2", pair)

    def test_unknown_axiom_rejected(self):
        with pytest.raises(ValidationError):
            canonical_axiom("TFC9")

    def test_every_axiom_none_on_identical_docs(self):
        tokens = ["water", "x", "liquid"]
        pair = pair_of(["water"], tokens, tokens)
        for name in AXIOM_NAMES:
            assert axiom_preference(name, pair, stats=STATS_EQUAL_IDF,
                                    similarity=SIM) is Preference.NONE


def random_pair(rng: random.Random) -> DocPair:
    """Mix of generic and precondition-targeted pairs."""
    vocab = ["water", "liquid", "drink", "rock", "stone", "t1", "t2", "q"] + [
        f"f{i}" for i in range(12)
    ]
    query = rng.sample(["water", "t1", "t2", "q"], rng.randint(1, 3))
    style = rng.randrange(5)
    if style == 0:  # same length, redistributed query mass
        length = rng.randint(3, 8)
        d1 = rng.choices(vocab, k=length)
        d2 = rng.choices(vocab, k=length)
    elif style == 1:  # one doc extends the other
        d2 = rng.choices(vocab, k=rng.randint(2, 6))
        d1 = d2 + rng.choices(vocab, k=rng.randint(1, 4))
        rng.shuffle(d1)
    elif style == 2:  # concatenation
        d2 = rng.choices(vocab, k=rng.randint(1, 4))
        d1 = d2 * rng.randint(1, 3)
    elif style == 3:  # extra copies of one query term
        d2 = rng.choices(vocab, k=rng.randint(2, 6))
        d1 = d2 + [query[0]] * rng.randint(1, 3)
    else:
        d1 = rng.choices(vocab, k=rng.randint(1, 8))
        d2 = rng.choices(vocab, k=rng.randint(1, 8))
    if rng.random() < 0.5:
        d1, d2 = d2, d1
    return pair_of(query, d1, d2)


class TestAntisymmetry:
    def test_swap_flips_preference_on_random_pairs(self):
        rng = random.Random(99)
        stats = TermStats(20, {"water": 2, "t1": 1, "t2": 8, "q": 5})
        for _ in range(2000):
            pair = random_pair(rng)
            swapped = pair.swapped()
            for name in AXIOM_NAMES:
                forward = axiom_preference(name, pair, stats=stats, similarity=SIM)
                backward = axiom_preference(name, swapped, stats=stats, similarity=SIM)
                assert backward is forward.swapped(), (name, pair.d1.tokens, pair.d2.tokens)


class TestPairGeneration:
    def test_lnc2_single_sample_doubles_tokens(self, tiny_corpus):
        run = make_run("m", {"q1": [("d1", 2.0)]})
        queries = make_queries({"q1": "social security"})
        pairs = lnc2_pairs([run], tiny_corpus, queries, sample_size=1, copies=[2])
        assert len(pairs) == 1
        assert pairs[0].d1.length == 2 * pairs[0].d2.length

    def test_lnc2_m1_is_identity_and_always_agreed(self, tiny_corpus):
        run = make_run("m", {"q1": [("d1", 2.0), ("d2", 1.0)]})
        queries = make_queries({"q1": "social security"})
        pairs = lnc2_pairs([run], tiny_corpus, queries, sample_size=2, copies=[1])
        assert all(p.d1.tokens == p.d2.tokens for p in pairs)
        row = agreement(lambda q, t: 42.0, pairs, "LNC2")
        assert row.applicable == len(pairs) and row.pct == 100.0

    def test_lnc2_fixed_seed_is_deterministic(self, tiny_corpus):
        runs = [
            make_run("m1", {"q1": [("d1", 2.0), ("d2", 1.5), ("d3", 1.0)]}),
            make_run("m2", {"q1": [("d3", 9.0), ("d2", 8.0)]}),
        ]
        queries = make_queries({"q1": "social security"})
        first = lnc2_pairs(runs, tiny_corpus, queries, sample_size=2, seed=7)
        second = lnc2_pairs(runs, tiny_corpus, queries, sample_size=2, seed=7)
        assert [(p.query_id, p.d2.doc_id, p.copies) for p in first] == [
            (p.query_id, p.d2.doc_id, p.copies) for p in second
        ]

    def test_lnc2_undersized_pool_warns_and_uses_all(self, tiny_corpus):
        run = make_run("m", {"q1": [("d1", 1.0)]})
        queries = make_queries({"q1": "social security"})
        with pytest.warns(UserWarning):
            pairs = lnc2_pairs([run], tiny_corpus, queries, sample_size=250, copies=[2])
        assert len(pairs) == 1

    def test_real_pairs_counts(self, tiny_corpus):
        queries = make_queries({f"q{i}": "social security" for i in range(1, 4)})
        rankings = {
            f"q{i}": [("d1", 3.0), ("d2", 2.0), ("d3", 1.0)] for i in range(1, 4)
        }
        run = make_run("m", rankings)
        assert len(real_pairs(run, tiny_corpus, queries, k=2)) == 3  # 1 per query
        assert len(real_pairs(run, tiny_corpus, queries, k=3)) == 9  # C(3,2)=3 each

    def test_real_pairs_higher_ranked_first(self, tiny_corpus):
        queries = make_queries({"q1": "x"})
        run = make_run("m", {"q1": [("d2", 5.0), ("d1", 1.0)]})
        (pair,) = real_pairs(run, tiny_corpus, queries, k=2)
        assert pair.d1.doc_id == "d2" and pair.copies is None

    def test_pair_count_for_fifty(self, tiny_corpus):
        # C(50, 2) per query
        corpus = make_corpus({f"d{i}": f"body {i}" for i in range(50)})
        queries = make_queries({"q1": "body"})
        run = make_run("m", {"q1": [(f"d{i}", float(50 - i)) for i in range(50)]})
        assert len(real_pairs(run, corpus, queries, k=50)) == 1225


class TestAgreement:
    def test_bm25_agrees_with_lnc2_on_synthetic_pairs(self):
        rng = random.Random(17)
        vocab = [f"w{i}" for i in range(30)]
        bodies = {
            f"d{i}": " ".join(rng.choices(vocab, k=rng.randint(5, 50)))
            for i in range(40)
        }
        corpus = make_corpus(bodies)
        queries = make_queries({"q1": "w0 w3", "q2": "w5"})
        run = make_run(
            "bm25",
            {
                "q1": [(f"d{i}", float(40 - i)) for i in range(10)],
                "q2": [(f"d{i}", float(40 - i)) for i in range(10, 20)],
            },
        )
        pairs = lnc2_pairs([run], corpus, queries, sample_size=20, copies=[1, 2, 3, 4],
                           fields=("body",))
        index = build_index(corpus, ("body",))
        params = Bm25Params()

        def scorer(query_tokens, field_tokens):
            return score_synthetic(index, params, query_tokens, field_tokens)

        row = agreement(scorer, pairs, "LNC2", model_tag="bm25")
        assert row.applicable == len(pairs)
        assert row.pct >= 99.0

    def test_run_identical_to_axiom_preferences_scores_100(self):
        # ranking puts the higher-tf doc first for every pair
        pairs = [
            pair_of(["w"], ["w", "w", "x"], ["w", "x", "y"], query_id="q1"),
        ]
        run = Run.from_scores("m", {"q1": [("d1", 2.0), ("d2", 1.0)]})
        row = agreement(run, pairs, "TFC1")
        assert (row.applicable, row.agreements, row.pct) == (1, 1, 100.0)

    def test_manual_tally_on_ten_tfc1_pairs(self):
        # model ranking: d_a > d_b > d_c > d_d (per query q1)
        run = Run.from_scores(
            "m", {"q1": [("a", 4.0), ("b", 3.0), ("c", 2.0), ("d", 1.0)]}
        )
        high = ["w", "w", "w", "x"]
        low = ["w", "x", "y", "z"]
        pairs = []
        expected_agreements = 0
        rng = random.Random(3)
        for i in range(10):
            first, second = rng.sample(["a", "b", "c", "d"], 2)
            d1 = PairDoc(first, {"body": high if i % 2 == 0 else low})
            d2 = PairDoc(second, {"body": low if i % 2 == 0 else high})
            pairs.append(DocPair("q1", ("w",), d1, d2))
            ranks = {"a": 1, "b": 2, "c": 3, "d": 4}
            axiom_prefers_first = i % 2 == 0
            model_prefers_first = ranks[first] < ranks[second]
            if axiom_prefers_first == model_prefers_first:
                expected_agreements += 1
        row = agreement(run, pairs, "TFC1")
        assert row.applicable == 10
        assert row.agreements == expected_agreements

    def test_missing_doc_is_skipped_not_applicable(self):
        run = Run.from_scores("m", {"q1": [("a", 1.0)]})
        pair = DocPair(
            "q1", ("w",),
            PairDoc("a", {"body": ["w", "w", "x"]}),
            PairDoc("zz", {"body": ["w", "x", "y"]}),
        )
        row = agreement(run, [pair], "TFC1")
        assert row.applicable == 0 and row.skipped == 1

    def test_lnc2_with_run_model_is_an_error(self):
        run = Run.from_scores("m", {"q1": [("a", 1.0)]})
        pair = pair_of(["w"], ["w", "w"], ["w"], copies=2)
        with pytest.raises(DataError):
            agreement(run, [pair], "LNC2")

    def test_bm25_satisfies_tfc1_on_exact_equal_length_single_term(self):
        # single query term keeps tf monotonicity analytic: at fixed length,
        # more occurrences always score higher
        rng = random.Random(8)
        vocab = [f"w{i}" for i in range(10)]
        corpus = make_corpus(
            {f"d{i}": " ".join(rng.choices(vocab, k=20)) for i in range(30)}
        )
        index = build_index(corpus, ("body",))
        params = Bm25Params()

        def scorer(query_tokens, field_tokens):
            return score_synthetic(index, params, query_tokens, field_tokens)

        pairs = []
        for _ in range(200):
            length = rng.randint(4, 12)
            tf1, tf2 = rng.sample(range(length + 1), 2)
            filler = [f"f{i}" for i in range(length)]
            d1 = ["w0"] * tf1 + filler[: length - tf1]
            d2 = ["w0"] * tf2 + filler[: length - tf2]
            pairs.append(pair_of(["w0"], d1, d2))
        row = agreement(scorer, pairs, "TFC1")
        assert row.applicable == len(pairs)
        assert row.pct == 100.0


class TestSimilarityProviders:
    def test_word_vectors_cosine(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text(
            "water 1.0 0.0\nliquid 0.8 0.6\nrock 0.0 1.0\n", encoding="utf-8"
        )
        vectors = WordVectors.load(path)
        assert vectors.similarity("water", "liquid") == pytest.approx(0.8)
        assert vectors.similarity("water", "water") == pytest.approx(1.0)
        assert vectors.similarity("water", "missing") == 0.0

    def test_word_vectors_dimension_mismatch(self, tmp_path):
        path = tmp_path / "vec.txt"
        path.write_text("a 1.0 0.0\nb 1.0\n", encoding="utf-8")
        with pytest.raises(DataError):
            WordVectors.load(path)

    def test_table_similarity_symmetric(self):
        assert SIM.similarity("liquid", "water") == pytest.approx(0.8)
        assert SIM.similarity("never", "seen") == 0.0
        assert SIM.similarity("same", "same") == 1.0
