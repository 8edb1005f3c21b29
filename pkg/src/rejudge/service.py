"""HTTP service exposing the annotation workflow.

The service is a thin shell over the offline modules: progress, agreement,
and qrels export are computed from the persisted judgment log with the
same functions the CLI uses, so every endpoint's answer can be reproduced
offline from the log file. Restarting with the same log reproduces
identical progress and export.

Persistence is an append-only JSONL log replayed at startup; no database.
All writes are serialized through one lock. Annotator identity is a
self-declared token (trusted-annotator setting).

Endpoints:
    GET  /api/tasks/next?annotator=A   next assignment or {"task": null}
    POST /api/judgments                {query_id, doc_id, annotator, grade}
    GET  /api/progress
    GET  /api/agreement
    GET  /api/qrels                    merged qrels as a TSV stream
    GET  /api/config
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone
from pathlib import Path

from fastapi import FastAPI, HTTPException, Query as QueryParam
from fastapi.responses import PlainTextResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .collection import Corpus, Qrels, QuerySet, qrels_to_tsv
from .errors import DataError
from .metrics import fleiss_kappa
from .pooling import (
    DEFAULT_RATERS,
    JudgmentRecord,
    Pool,
    append_judgment,
    merge_judgments,
    read_judgments,
)


class JudgmentIn(BaseModel):
    query_id: str
    doc_id: str
    annotator: str
    grade: int


class AnnotationState:
    """In-memory view of the pool plus the replayed judgment log."""

    def __init__(self, pool: Pool, corpus: Corpus, queries: QuerySet,
                 raters_per_item: int = DEFAULT_RATERS,
                 log_path: str | Path = "judgments.jsonl"):
        self.pool = pool
        self.corpus = corpus
        self.queries = queries
        self.raters_per_item = raters_per_item
        self.log_path = Path(log_path)
        self.lock = threading.Lock()
        # task -> {annotator: grade}
        self.judgments: dict[tuple[str, str], dict[str, int]] = {}
        # tasks handed out per annotator; never hand the same task out twice
        self.assigned: dict[str, set[tuple[str, str]]] = {}
        for task in pool:
            query_id, doc_id = task
            if query_id not in queries:
                raise DataError(f"pool query {query_id!r} missing from query set")
            if doc_id not in corpus:
                raise DataError(f"pool doc {doc_id!r} missing from corpus")
        if self.log_path.exists():
            for record in read_judgments(self.log_path):
                self._absorb(record)

    def _absorb(self, record: JudgmentRecord) -> None:
        task = record.task()
        if task not in self.pool:
            raise DataError(f"log record for task {task!r} outside the pool")
        grades = self.judgments.setdefault(task, {})
        if record.annotator in grades and grades[record.annotator] != record.grade:
            raise DataError(
                f"log has conflicting grades from {record.annotator!r} on {task!r}"
            )
        grades[record.annotator] = record.grade
        self.assigned.setdefault(record.annotator, set()).add(task)

    def completed(self, task: tuple[str, str]) -> int:
        return len(self.judgments.get(task, {}))

    def next_task(self, annotator: str):
        with self.lock:
            assigned = self.assigned.setdefault(annotator, set())
            best = None
            best_key = None
            for task in self.pool:
                done = self.completed(task)
                if done >= self.raters_per_item or task in assigned:
                    continue
                key = (done, task)
                if best_key is None or key < best_key:
                    best, best_key = task, key
            if best is None:
                return None
            assigned.add(best)
            query_id, doc_id = best
            doc = self.corpus.get(doc_id)
            return {
                "query_id": query_id,
                "query_text": self.queries.get(query_id).text,
                "doc_id": doc_id,
                "title": doc.title,
                "body": doc.body,
                "outstanding_raters": self.raters_per_item - self.completed(best),
            }

    def submit(self, payload: JudgmentIn) -> dict:
        if payload.grade not in (0, 1, 2):
            raise HTTPException(status_code=400, detail=f"grade {payload.grade} outside {{0, 1, 2}}")
        task = (payload.query_id, payload.doc_id)
        with self.lock:
            if task not in self.pool:
                raise HTTPException(status_code=403, detail=f"task {task} is not in the pool")
            grades = self.judgments.get(task, {})
            existing = grades.get(payload.annotator)
            if existing is not None:
                if existing == payload.grade:
                    return {"status": "duplicate", "stored": False}
                raise HTTPException(
                    status_code=409,
                    detail=f"annotator {payload.annotator!r} already graded {task} as {existing}",
                )
            if task not in self.assigned.get(payload.annotator, set()):
                raise HTTPException(
                    status_code=403,
                    detail=f"task {task} was not assigned to {payload.annotator!r}",
                )
            if len(grades) >= self.raters_per_item:
                # lost an assignment race; client should fetch the next task
                raise HTTPException(status_code=409, detail=f"task {task} is fully judged")
            record = JudgmentRecord(
                query_id=payload.query_id,
                doc_id=payload.doc_id,
                annotator=payload.annotator,
                grade=payload.grade,
                timestamp=datetime.now(timezone.utc).isoformat(),
            )
            append_judgment(self.log_path, record)
            self.judgments.setdefault(task, {})[payload.annotator] = payload.grade
            return {"status": "ok", "stored": True}

    def progress(self) -> dict:
        with self.lock:
            per_annotator: dict[str, int] = {}
            for grades in self.judgments.values():
                for annotator in grades:
                    per_annotator[annotator] = per_annotator.get(annotator, 0) + 1
            fully = sum(
                1 for task in self.pool if self.completed(task) >= self.raters_per_item
            )
            total_judgments = sum(len(g) for g in self.judgments.values())
            return {
                "total_tasks": len(self.pool),
                "fully_judged": fully,
                "total_judgments": total_judgments,
                "raters_per_item": self.raters_per_item,
                "per_annotator": dict(sorted(per_annotator.items())),
            }

    def _full_records(self) -> list[JudgmentRecord]:
        records = []
        for task in sorted(self.judgments):
            grades = self.judgments[task]
            if len(grades) == self.raters_per_item:
                for annotator in sorted(grades):
                    records.append(
                        JudgmentRecord(task[0], task[1], annotator, grades[annotator])
                    )
        return records

    def agreement(self) -> dict:
        with self.lock:
            _, matrix = merge_judgments(
                Qrels(), self._full_records(), self.raters_per_item
            )
            if len(matrix.items) < 2:
                raise HTTPException(
                    status_code=409,
                    detail="agreement needs at least 2 fully judged tasks",
                )
            try:
                kappa = fleiss_kappa(matrix)
            except DataError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            return {"kappa": kappa, "items": len(matrix.items)}

    def export_qrels(self) -> str:
        with self.lock:
            merged, _ = merge_judgments(
                Qrels(), self._full_records(), self.raters_per_item
            )
            return qrels_to_tsv(merged)


def create_app(pool: Pool, corpus: Corpus, queries: QuerySet,
               raters_per_item: int = DEFAULT_RATERS,
               log_path: str | Path = "judgments.jsonl",
               guideline_url: str | None = None,
               ui_dir: str | Path | None = None) -> FastAPI:
    state = AnnotationState(pool, corpus, queries, raters_per_item, log_path)
    app = FastAPI(title="rejudge annotation service")
    app.state.annotation = state

    @app.get("/api/tasks/next")
    def next_task(annotator: str = QueryParam(...)):
        if not annotator:
            raise HTTPException(status_code=400, detail="annotator token required")
        if not len(state.pool):
            raise HTTPException(status_code=409, detail="the pool is empty")
        return {"task": state.next_task(annotator)}

    @app.post("/api/judgments")
    def submit(payload: JudgmentIn):
        return state.submit(payload)

    @app.get("/api/progress")
    def progress():
        return state.progress()

    @app.get("/api/agreement")
    def agreement():
        return state.agreement()

    @app.get("/api/qrels")
    def qrels():
        return PlainTextResponse(
            state.export_qrels(), media_type="text/tab-separated-values"
        )

    @app.get("/api/config")
    def config():
        return {
            "raters_per_item": state.raters_per_item,
            "total_tasks": len(state.pool),
            "guideline_url": guideline_url,
        }

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")
    return app
