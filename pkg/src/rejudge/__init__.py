"""Toolkit for diagnosing, denoising, and re-judging retrieval test collections."""

from .collection import (
    Corpus,
    Document,
    Qrels,
    Query,
    QuerySet,
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
from .lexical import Bm25Params, Index, bm25_score, build_index, score_synthetic, search, tokenize
from .metrics import (
    LengthSummary,
    MetricReport,
    RatingMatrix,
    error_rate_at_k,
    fleiss_kappa,
    hole_at_k,
    length_summary,
    ndcg_at_k,
    spearman,
)

__version__ = "0.1.0"

__all__ = [
    "Bm25Params",
    "Corpus",
    "Document",
    "Index",
    "LengthSummary",
    "MetricReport",
    "Qrels",
    "Query",
    "QuerySet",
    "RatingMatrix",
    "Run",
    "bm25_score",
    "build_index",
    "error_rate_at_k",
    "fleiss_kappa",
    "hole_at_k",
    "length_summary",
    "ndcg_at_k",
    "parse_corpus",
    "parse_qrels",
    "parse_queries",
    "parse_run",
    "score_synthetic",
    "search",
    "spearman",
    "tokenize",
    "write_corpus",
    "write_qrels",
    "write_queries",
    "write_run",
    "__version__",
]
