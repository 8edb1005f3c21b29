"""TSV and JSON export for the toolkit's report types."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable, Sequence

from .axioms import AgreementRow
from .denoise import DenoiseReport, SweepEntry
from .metrics import LengthSummary, MetricReport


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def metric_report_tsv(report: MetricReport) -> str:
    lines = ["metric\tk\tquery_id\tvalue"]
    for query_id, value in report.per_query.items():
        lines.append(f"{report.metric}\t{report.k}\t{query_id}\t{value:.6f}")
    lines.append(f"{report.metric}\t{report.k}\tmean\t{report.mean:.6f}")
    if report.micro is not None:
        lines.append(f"{report.metric}\t{report.k}\tmicro\t{report.micro:.6f}")
    return "\n".join(lines) + "\n"


def metric_report_json(report: MetricReport) -> dict:
    payload = {
        "metric": report.metric,
        "k": report.k,
        "per_query": report.per_query,
        "mean": report.mean,
    }
    if report.micro is not None:
        payload["micro"] = report.micro
    if report.flagged:
        payload["queries_without_ideal"] = list(report.flagged)
    return payload


def write_metric_report(report: MetricReport, out_dir: str | Path, basename: str) -> None:
    out = Path(out_dir)
    _write(out / f"{basename}.tsv", metric_report_tsv(report))
    _write(out / f"{basename}.json", json.dumps(metric_report_json(report), indent=2) + "\n")


def length_summary_json(summary: LengthSummary) -> dict:
    return {
        "n": summary.n,
        "mean": summary.mean,
        "median": summary.median,
        "q1": summary.q1,
        "q3": summary.q3,
        "ci95": [summary.ci95_low, summary.ci95_high],
    }


def write_length_summary(summary: LengthSummary, out_dir: str | Path, basename: str) -> None:
    out = Path(out_dir)
    payload = length_summary_json(summary)
    tsv = (
        "n\tmean\tmedian\tq1\tq3\tci95_low\tci95_high\n"
        f"{summary.n}\t{summary.mean:.6f}\t{summary.median:.6f}\t{summary.q1:.6f}"
        f"\t{summary.q3:.6f}\t{summary.ci95_low:.6f}\t{summary.ci95_high:.6f}\n"
    )
    _write(out / f"{basename}.tsv", tsv)
    _write(out / f"{basename}.json", json.dumps(payload, indent=2) + "\n")


def axiom_report_tsv(rows: Iterable[AgreementRow]) -> str:
    lines = ["axiom\tmodel\tapplicable\tagreements\tpct"]
    for row in rows:
        lines.append(
            f"{row.axiom}\t{row.model}\t{row.applicable}\t{row.agreements}\t{row.pct:.1f}"
        )
    return "\n".join(lines) + "\n"


def axiom_report_json(rows: Iterable[AgreementRow]) -> list[dict]:
    return [
        {
            "axiom": row.axiom,
            "model": row.model,
            "applicable": row.applicable,
            "agreements": row.agreements,
            "pct": row.pct,
            "skipped": row.skipped,
        }
        for row in rows
    ]


def write_axiom_report(rows: Sequence[AgreementRow], out_dir: str | Path,
                       basename: str = "axioms") -> None:
    out = Path(out_dir)
    _write(out / f"{basename}.tsv", axiom_report_tsv(rows))
    _write(out / f"{basename}.json", json.dumps(axiom_report_json(rows), indent=2) + "\n")


def sweep_tsv(entries: Iterable[SweepEntry]) -> str:
    lines = ["threshold\tmodel\tndcg\tapproximate"]
    for entry in entries:
        approx = "yes" if entry.approximate else "no"
        lines.append(f"{entry.threshold}\t{entry.model}\t{entry.ndcg:.6f}\t{approx}")
    return "\n".join(lines) + "\n"


def write_sweep(entries: Sequence[SweepEntry], out_dir: str | Path,
                basename: str = "sweep") -> None:
    out = Path(out_dir)
    _write(out / f"{basename}.tsv", sweep_tsv(entries))
    payload = [
        {
            "threshold": entry.threshold,
            "model": entry.model,
            "ndcg": entry.ndcg,
            "approximate": entry.approximate,
        }
        for entry in entries
    ]
    _write(out / f"{basename}.json", json.dumps(payload, indent=2) + "\n")


def write_denoise_report(report: DenoiseReport, out_dir: str | Path,
                         basename: str = "denoise_report") -> None:
    _write(Path(out_dir) / f"{basename}.json", json.dumps(report.to_dict(), indent=2) + "\n")
