"""Judgment-pool construction, hole identification, and judgment merging.

A pool is the deduplicated union of the top-k results of several runs,
each task remembering which runs contributed it. Holes are pool tasks
without a qrels entry. Post-hoc judgments are merged by majority vote with
``raters_per_item`` raters per task; a vote tie falls back to the floored
median grade. Existing qrels entries are never overwritten: hole filling
adds judgments, it does not revise originals.

Pool files are TSV with a header, one task per line:

    query-id<TAB>corpus-id<TAB>provenance

where provenance is a comma-joined list of contributing run tags (the
third column carries provenance rather than a grade because pool tasks are
by definition ungraded). Judgment records persist as append-only JSONL.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .collection import Qrels, Run
from .errors import DataError, ParseError, ValidationError
from .metrics import RatingMatrix

DEFAULT_RATERS = 3


class Pool:
    """Ordered set of (query_id, doc_id) tasks with run provenance."""

    def __init__(self, tasks: Mapping[tuple[str, str], Iterable[str]] | None = None):
        self._tasks: dict[tuple[str, str], tuple[str, ...]] = {}
        if tasks:
            for task in sorted(tasks):
                self._tasks[task] = tuple(sorted(set(tasks[task])))

    def __len__(self) -> int:
        return len(self._tasks)

    def __iter__(self):
        return iter(self._tasks)

    def __contains__(self, task: tuple[str, str]) -> bool:
        return task in self._tasks

    def provenance(self, task: tuple[str, str]) -> tuple[str, ...]:
        return self._tasks[task]

    def tasks(self) -> list[tuple[str, str]]:
        return list(self._tasks)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Pool):
            return NotImplemented
        return self._tasks == other._tasks


def pool_top_k(runs: Sequence[Run], k: int) -> Pool:
    """Union of every run's top-k per query, deduplicated."""
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    tasks: dict[tuple[str, str], set[str]] = {}
    for run in runs:
        for query_id in run.query_ids():
            for entry in run.top(query_id, k):
                tasks.setdefault((query_id, entry.doc_id), set()).add(run.tag)
    return Pool(tasks)


def find_holes(pool: Pool, qrels: Qrels) -> Pool:
    """Pool tasks without any relevance judgment."""
    return Pool({
        task: pool.provenance(task)
        for task in pool
        if not qrels.is_judged(*task)
    })


def write_pool(pool: Pool, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        handle.write("query-id\tcorpus-id\tprovenance\n")
        for query_id, doc_id in pool:
            provenance = ",".join(pool.provenance((query_id, doc_id)))
            handle.write(f"{query_id}\t{doc_id}\t{provenance}\n")


def parse_pool(path: str | Path) -> Pool:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"pool file not found: {path}")
    tasks: dict[tuple[str, str], tuple[str, ...]] = {}
    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if line_no == 1 and line.startswith("query-id"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ParseError(str(path), line_no, "expected 2 or 3 tab-separated columns")
            query_id, doc_id = parts[0], parts[1]
            provenance = tuple(t for t in parts[2].split(",") if t) if len(parts) == 3 else ()
            if (query_id, doc_id) in tasks:
                raise ParseError(
                    str(path), line_no, f"duplicate task ({query_id!r}, {doc_id!r})"
                )
            tasks[(query_id, doc_id)] = provenance
    return Pool(tasks)


@dataclass(frozen=True)
class JudgmentRecord:
    query_id: str
    doc_id: str
    annotator: str
    grade: int
    timestamp: str = ""

    def __post_init__(self):
        if self.grade not in (0, 1, 2):
            raise DataError(
                f"grade {self.grade!r} for ({self.query_id!r}, {self.doc_id!r}) "
                "outside {0, 1, 2}"
            )

    def task(self) -> tuple[str, str]:
        return (self.query_id, self.doc_id)

    def to_json(self) -> str:
        return json.dumps(
            {
                "query_id": self.query_id,
                "doc_id": self.doc_id,
                "annotator": self.annotator,
                "grade": self.grade,
                "timestamp": self.timestamp,
            },
            ensure_ascii=False,
        )


def read_judgments(path: str | Path) -> list[JudgmentRecord]:
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"judgment log not found: {path}")
    records: list[JudgmentRecord] = []
    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), line_no, f"malformed JSON: {exc.msg}") from exc
            try:
                records.append(
                    JudgmentRecord(
                        query_id=str(obj["query_id"]),
                        doc_id=str(obj["doc_id"]),
                        annotator=str(obj["annotator"]),
                        grade=int(obj["grade"]),
                        timestamp=str(obj.get("timestamp", "")),
                    )
                )
            except KeyError as exc:
                raise ParseError(str(path), line_no, f"missing field {exc.args[0]!r}") from None
    return records


def append_judgment(path: str | Path, record: JudgmentRecord) -> None:
    with Path(path).open("a", encoding="utf-8") as handle:
        handle.write(record.to_json() + "\n")
        handle.flush()


def aggregate_grades(grades: Sequence[int]) -> int:
    """Majority vote; ties fall back to the floored median."""
    counts = {}
    for grade in grades:
        counts[grade] = counts.get(grade, 0) + 1
    best = max(counts.values())
    winners = [grade for grade, count in counts.items() if count == best]
    if len(winners) == 1:
        return winners[0]
    ordered = sorted(grades)
    mid = len(ordered) / 2
    if len(ordered) % 2:
        return ordered[len(ordered) // 2]
    return math.floor((ordered[len(ordered) // 2 - 1] + ordered[len(ordered) // 2]) / 2)


def merge_judgments(base_qrels: Qrels, records: Iterable[JudgmentRecord],
                    raters_per_item: int = DEFAULT_RATERS) -> tuple[Qrels, RatingMatrix]:
    """Aggregate per-task records and fill them into the base qrels.

    Every task must carry exactly ``raters_per_item`` records from distinct
    annotators. Tasks already judged in the base keep their original grade
    but still feed the rating matrix.
    """
    by_task: dict[tuple[str, str], list[JudgmentRecord]] = {}
    for record in records:
        task_records = by_task.setdefault(record.task(), [])
        if any(r.annotator == record.annotator for r in task_records):
            raise DataError(
                f"annotator {record.annotator!r} judged task {record.task()!r} twice"
            )
        task_records.append(record)

    wrong = sorted(
        task for task, task_records in by_task.items()
        if len(task_records) != raters_per_item
    )
    if wrong:
        raise DataError(
            f"tasks without exactly {raters_per_item} judgments: {wrong}"
        )

    merged = Qrels()
    for (query_id, doc_id), grade in base_qrels.items():
        merged.add(query_id, doc_id, grade)
    items: list[tuple[tuple[str, str], dict[int, int]]] = []
    for task in sorted(by_task):
        grades = [record.grade for record in by_task[task]]
        counts = {grade: grades.count(grade) for grade in set(grades)}
        items.append((task, counts))
        if not base_qrels.is_judged(*task):
            merged.add(task[0], task[1], aggregate_grades(grades))
    matrix = RatingMatrix(items=items, raters_per_item=raters_per_item)
    return merged, matrix
