"""Command-line entry point wiring the modules into reproducible commands.

Commands compose through files only; there is no hidden state between
invocations, and any randomness flows through an explicit --seed. Exit
codes: 0 success, 1 validation error (bad flags, missing files), 2 data
error (malformed or contract-violating content).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import augment as augment_mod
from . import axioms as axioms_mod
from . import denoise as denoise_mod
from . import reports
from .collection import (
    parse_corpus,
    parse_qrels,
    parse_queries,
    parse_run,
    write_corpus,
    write_qrels,
    write_run,
)
from .errors import DataError, ValidationError
from .lexical import Bm25Params, Index, build_index, search_run
from .metrics import (
    error_rate_at_k,
    fleiss_kappa,
    hole_at_k,
    length_summary,
    ndcg_at_k,
)
from .pooling import (
    find_holes,
    merge_judgments,
    parse_pool,
    pool_top_k,
    read_judgments,
    write_pool,
)


def _require_files(*paths: str | None) -> None:
    for path in paths:
        if path is not None and not Path(path).is_file():
            raise ValidationError(f"input file not found: {path}")


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _params(args) -> Bm25Params:
    weights = {"title": args.title_weight, "body": args.body_weight}
    return Bm25Params(k1=args.k1, b=args.b, field_weights=weights)


def _add_bm25_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k1", type=float, default=0.9)
    parser.add_argument("--b", type=float, default=0.4)
    parser.add_argument("--title-weight", type=float, default=1.0)
    parser.add_argument("--body-weight", type=float, default=1.0)
    parser.add_argument(
        "--fields", default="title,body",
        help="comma-separated subset of title,body to index",
    )


def _fields(args) -> tuple[str, ...]:
    fields = tuple(f.strip() for f in args.fields.split(",") if f.strip())
    if not fields or any(f not in ("title", "body") for f in fields):
        raise ValidationError(f"--fields must be a subset of title,body, got {args.fields!r}")
    return fields


def cmd_index(args) -> int:
    _require_files(args.corpus)
    corpus = parse_corpus(args.corpus)
    index = build_index(corpus, _fields(args))
    index.save(args.out)
    print(f"indexed {index.n_docs} documents over fields {','.join(index.fields)} -> {args.out}")
    return 0


def cmd_search(args) -> int:
    if bool(args.index) == bool(args.corpus):
        raise ValidationError("pass exactly one of --corpus or --index")
    if args.index:
        _require_files(args.index, args.queries)
        index = Index.load(args.index)
    else:
        _require_files(args.corpus, args.queries)
        index = build_index(parse_corpus(args.corpus), _fields(args))
    queries = parse_queries(args.queries)
    run = search_run(index, _params(args), queries, args.k, tag=args.tag)
    write_run(run, args.out)
    print(f"wrote run for {len(run.query_ids())} queries -> {args.out}")
    return 0


def cmd_evaluate(args) -> int:
    _require_files(args.qrels, args.corpus, *args.run)
    qrels = parse_qrels(args.qrels)
    corpus = parse_corpus(args.corpus) if args.corpus else None
    out = _out_dir(args)
    for run_path in args.run:
        run = parse_run(run_path)
        tag = run.tag or Path(run_path).stem
        ndcg = ndcg_at_k(run, qrels, args.k)
        hole = hole_at_k(run, qrels, args.k)
        reports.write_metric_report(ndcg, out, f"{tag}.ndcg@{args.k}")
        reports.write_metric_report(hole, out, f"{tag}.hole@{args.k}")
        line = f"{tag}: nDCG@{args.k}={ndcg.mean:.4f} hole@{args.k}={100 * hole.micro:.1f}%"
        if corpus is not None:
            errors = error_rate_at_k(run, qrels, corpus, args.k, args.min_words)
            lengths = length_summary(run, corpus, args.k)
            reports.write_metric_report(errors, out, f"{tag}.error_rate@{args.k}")
            reports.write_length_summary(lengths, out, f"{tag}.length@{args.k}")
            line += f" error-rate@{args.k}={100 * errors.micro:.1f}% median-len={lengths.median:.0f}"
        print(line)
    return 0


def cmd_denoise(args) -> int:
    _require_files(args.corpus, args.qrels)
    corpus = parse_corpus(args.corpus)
    qrels = parse_qrels(args.qrels)
    filtered, kept_qrels, report = denoise_mod.denoise_corpus(
        corpus, qrels, min_words=args.min_words, strip=args.strip_titles
    )
    out = _out_dir(args)
    write_corpus(filtered, out / "corpus.jsonl")
    write_qrels(kept_qrels, out / "qrels.tsv")
    reports.write_denoise_report(report, out)
    print(
        f"documents {report.docs_before} -> {report.docs_after}; "
        f"judgments {report.judgments_before} -> {report.judgments_after} "
        f"(removed per grade: {report.removed_by_grade})"
    )
    return 0


def cmd_sweep(args) -> int:
    _require_files(args.corpus, args.queries, args.qrels, *args.runs)
    thresholds = sorted(int(x) for x in args.thresholds.split(","))
    entries = denoise_mod.threshold_sweep(
        parse_corpus(args.corpus),
        parse_queries(args.queries),
        parse_qrels(args.qrels),
        thresholds,
        params=_params(args),
        k=args.k,
        strip=args.strip_titles,
        external_runs=[parse_run(p) for p in args.runs],
    )
    out = _out_dir(args)
    reports.write_sweep(entries, out)
    for entry in entries:
        marker = " (approximate)" if entry.approximate else ""
        print(f"n={entry.threshold}\t{entry.model}\tnDCG@{args.k}={entry.ndcg:.4f}{marker}")
    return 0


def cmd_augment(args) -> int:
    if bool(args.expansions) == bool(args.summaries):
        raise ValidationError("pass exactly one of --expansions or --summaries")
    _require_files(args.corpus, args.expansions, args.summaries)
    corpus = parse_corpus(args.corpus)
    if args.expansions:
        corpus = augment_mod.apply_expansions(
            corpus, augment_mod.parse_expansions(args.expansions)
        )
    else:
        corpus = augment_mod.apply_summaries(
            corpus, augment_mod.parse_summaries(args.summaries)
        )
    write_corpus(corpus, args.out)
    print(f"wrote {len(corpus)} documents -> {args.out}")
    return 0


def cmd_axioms(args) -> int:
    _require_files(args.corpus, args.queries, args.vectors, *args.runs)
    corpus = parse_corpus(args.corpus)
    queries = parse_queries(args.queries)
    runs = [parse_run(p) for p in args.runs]
    fields = _fields(args)
    similarity = axioms_mod.WordVectors.load(args.vectors) if args.vectors else None
    rows = []
    if args.mode == "lnc2":
        copies = tuple(int(x) for x in args.multipliers.split(","))
        pairs = axioms_mod.lnc2_pairs(
            runs, corpus, queries,
            sample_size=args.sample, copies=copies, seed=args.seed, fields=fields,
        )
        index = build_index(corpus, fields)
        params = _params(args)

        def scorer(query_tokens, field_tokens):
            from .lexical import score_synthetic

            return score_synthetic(index, params, query_tokens, field_tokens)

        rows.append(
            axioms_mod.agreement(scorer, pairs, "LNC2", model_tag=args.scorer)
        )
    else:
        query_terms = {
            token
            for query in queries
            for token in axioms_mod.tokenize(query.text)
        }
        stats = axioms_mod.TermStats.from_corpus(corpus, fields, terms=query_terms)
        names = [axioms_mod.canonical_axiom(a) for a in args.axioms.split(",")] \
            if args.axioms else [
                a for a in axioms_mod.AXIOM_NAMES
                if a != "LNC2" and (similarity or not a.startswith("STMC"))
            ]
        for run in runs:
            pairs = axioms_mod.real_pairs(run, corpus, queries, k=args.k, fields=fields)
            for name in names:
                rows.append(
                    axioms_mod.agreement(run, pairs, name, stats=stats,
                                         similarity=similarity)
                )
    out = _out_dir(args)
    reports.write_axiom_report(rows, out)
    for row in rows:
        print(f"{row.axiom}\t{row.model}\tapplicable={row.applicable}\tpct={row.pct:.1f}")
    return 0


def cmd_pool(args) -> int:
    _require_files(*args.runs)
    pool = pool_top_k([parse_run(p) for p in args.runs], args.k)
    write_pool(pool, args.out)
    print(f"pool of {len(pool)} tasks -> {args.out}")
    return 0


def cmd_holes(args) -> int:
    _require_files(args.pool, args.qrels)
    holes = find_holes(parse_pool(args.pool), parse_qrels(args.qrels))
    write_pool(holes, args.out)
    print(f"{len(holes)} unjudged tasks -> {args.out}")
    return 0


def cmd_merge(args) -> int:
    _require_files(args.qrels, args.records)
    base = parse_qrels(args.qrels)
    records = read_judgments(args.records)
    merged, matrix = merge_judgments(base, records, args.raters_per_item)
    out = _out_dir(args)
    write_qrels(merged, out / "qrels.tsv")
    payload = {"judgments": len(merged), "merged_tasks": len(merged) - len(base)}
    try:
        payload["kappa"] = fleiss_kappa(matrix)
    except DataError as exc:
        payload["kappa"] = None
        payload["kappa_error"] = str(exc)
    (out / "agreement.json").write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    kappa = payload["kappa"]
    print(
        f"qrels {len(base)} -> {len(merged)}; "
        f"kappa={'undefined' if kappa is None else f'{kappa:.3f}'}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    _require_files(args.pool, args.corpus, args.queries)
    app = create_app(
        parse_pool(args.pool),
        parse_corpus(args.corpus),
        parse_queries(args.queries),
        raters_per_item=args.raters_per_item,
        log_path=args.log,
        guideline_url=args.guideline_url,
        ui_dir=args.ui,
    )
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rejudge",
        description="Diagnose, denoise, and re-judge ranked-retrieval test collections.",
    )
    parser.add_argument("--threads", type=int, default=1,
                        help="internal parallelism (outputs are independent of it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and serialize a BM25 index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_bm25_flags(p)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="retrieve with the built-in BM25 engine")
    p.add_argument("--corpus")
    p.add_argument("--index")
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--tag", default="bm25")
    p.add_argument("--out", required=True)
    _add_bm25_flags(p)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("evaluate", help="nDCG/hole/error-rate/length reports for runs")
    p.add_argument("--run", action="append", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--corpus")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--min-words", type=int, default=20)
    p.add_argument("--out", default="reports")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("denoise", help="strip titles, drop short docs, reconcile qrels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--min-words", type=int, default=20)
    p.add_argument("--strip-titles", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--out", default="denoised")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("sweep", help="nDCG per length threshold")
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--thresholds", default="0,10,20,30")
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--strip-titles", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--runs", nargs="*", default=[])
    p.add_argument("--out", default="sweep")
    _add_bm25_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("augment", help="apply expansions or summary replacements")
    p.add_argument("--corpus", required=True)
    p.add_argument("--expansions")
    p.add_argument("--summaries")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("axioms", help="axiom agreement on real or synthetic pairs")
    p.add_argument("--mode", choices=("real", "lnc2"), required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--k", type=int, default=50, help="top-k for real pairs")
    p.add_argument("--sample", type=int, default=250)
    p.add_argument("--multipliers", default="1,2,3,4")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scorer", default="bm25")
    p.add_argument("--vectors", help="word-vector file for the STMC axioms")
    p.add_argument("--axioms", help="comma-separated axiom subset")
    p.add_argument("--out", default="axioms")
    _add_bm25_flags(p)
    p.set_defaults(func=cmd_axioms)

    p = sub.add_parser("pool", help="top-k pool from runs")
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_pool)

    p = sub.add_parser("holes", help="pool tasks without judgments")
    p.add_argument("--pool", required=True)
    p.add_argument("--qrels", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_holes)

    p = sub.add_parser("merge", help="merge post-hoc judgments into qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("--records", required=True)
    p.add_argument("--raters-per-item", type=int, default=3)
    p.add_argument("--out", default="merged")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("serve", help="run the annotation HTTP service")
    p.add_argument("--pool", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--queries", required=True)
    p.add_argument("--raters-per-item", type=int, default=3)
    p.add_argument("--log", default="judgments.jsonl")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--guideline-url")
    p.add_argument("--ui", help="directory with the static annotation UI")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())
