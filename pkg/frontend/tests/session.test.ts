/**
 * Scripted annotation sessions against the mocked service, including the
 * merge-equivalence check: the log produced through the UI, merged
 * offline, must equal the service's export byte for byte.
 */

import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { AnnotationSession, type SessionView } from "../src/session.js";
import type {
  AgreementResponse,
  Grade,
  ProgressSnapshot,
  TaskAssignment,
} from "../src/types.js";
import { MockService, mergeLogToTsv, tenTaskPool } from "./mock-service.js";

class RecordingView implements SessionView {
  tasks: TaskAssignment[] = [];
  progress: Array<{ snapshot: ProgressSnapshot; agreement: AgreementResponse | null }> = [];
  errors: string[] = [];
  completeShown = 0;
  lastDisabled: boolean | null = null;

  showTask(task: TaskAssignment, _grade: Grade | null, disabled: boolean): void {
    if (this.tasks[this.tasks.length - 1]?.doc_id !== task.doc_id) {
      this.tasks.push(task);
    }
    this.lastDisabled = disabled;
  }
  showComplete(): void {
    this.completeShown += 1;
  }
  showProgress(snapshot: ProgressSnapshot, agreement: AgreementResponse | null): void {
    this.progress.push({ snapshot, agreement });
  }
  showError(message: string): void {
    this.errors.push(message);
  }
  clearError(): void {}
}

async function runFullSession(
  service: MockService,
  annotator: string,
  gradeFor: (task: TaskAssignment) => Grade,
): Promise<RecordingView> {
  const view = new RecordingView();
  const api = new ApiClient(service.makeFetch());
  const session = new AnnotationSession(api, annotator, view);
  await session.start();
  let guard = 0;
  while (!session.complete && (guard += 1) < 100) {
    const task = session.current;
    if (!task) break;
    await session.handleKey(String(gradeFor(task)));
    await session.handleKey("Enter");
  }
  return view;
}

// Contract fixture shared with the backend test suite
// (tests/test_service.py pins the identical bytes for the same session).
const GOLDEN_EXPORT =
  "query-id\tcorpus-id\tscore\n" +
  "q1\td00\t0\nq1\td01\t1\nq2\td02\t1\nq2\td03\t0\nq3\td04\t1\n" +
  "q3\td05\t1\nq4\td06\t0\nq4\td07\t1\nq5\td08\t1\nq5\td09\t0\n";

describe("scripted ten-task session", () => {
  it("produces a log whose offline merge equals the export byte for byte", async () => {
    const service = tenTaskPool();
    const gradeA = (task: TaskAssignment): Grade =>
      (Number(task.doc_id.slice(1)) % 3) as Grade;
    const gradeB = (task: TaskAssignment): Grade =>
      ((Number(task.doc_id.slice(1)) + 1) % 3) as Grade;
    await runFullSession(service, "alice", gradeA);
    await runFullSession(service, "bob", gradeB);

    expect(service.log.length).toBe(20);
    expect(service.fullyJudged()).toBe(10);

    const exported = service.exportQrels();
    const offline = mergeLogToTsv(service.log, service.ratersPerItem);
    expect(offline).toBe(exported);
    expect(exported).toBe(GOLDEN_EXPORT);

    // shape sanity: header plus one line per task, trailing newline
    const lines = exported.split("\n");
    expect(lines[0]).toBe("query-id\tcorpus-id\tscore");
    expect(lines.length).toBe(12);
    expect(lines[11]).toBe("");
  });

  it("never shows the same task to one annotator twice", async () => {
    const service = tenTaskPool();
    const view = await runFullSession(service, "alice", () => 2 as Grade);
    const seen = view.tasks.map((t) => `${t.query_id}/${t.doc_id}`);
    expect(new Set(seen).size).toBe(seen.length);
    expect(seen.length).toBe(10);
    expect(view.completeShown).toBe(1);
  });

  it("keyboard path: digit selects, Enter submits", async () => {
    const service = tenTaskPool();
    const view = new RecordingView();
    const session = new AnnotationSession(
      new ApiClient(service.makeFetch()),
      "kb",
      view,
    );
    await session.start();
    expect(session.current).not.toBeNull();
    await session.handleKey("1");
    expect(session.selectedGrade).toBe(1);
    expect(service.log.length).toBe(0); // selection alone submits nothing
    await session.handleKey("Enter");
    expect(service.log.length).toBe(1);
    expect(service.log[0].grade).toBe(1);
    expect(service.log[0].annotator).toBe("kb");
  });

  it("Enter without a selected grade is a no-op", async () => {
    const service = tenTaskPool();
    const session = new AnnotationSession(
      new ApiClient(service.makeFetch()),
      "kb",
      new RecordingView(),
    );
    await session.start();
    await session.handleKey("Enter");
    expect(service.log.length).toBe(0);
  });

  it("skip advances without writing a judgment", async () => {
    const service = tenTaskPool();
    const view = new RecordingView();
    const session = new AnnotationSession(
      new ApiClient(service.makeFetch()),
      "skipper",
      view,
    );
    await session.start();
    const first = session.current?.doc_id;
    await session.skip();
    expect(session.current?.doc_id).not.toBe(first);
    expect(service.log.length).toBe(0);
  });

  it("progress numbers passed to the view equal the service response", async () => {
    const service = tenTaskPool();
    const view = await runFullSession(service, "alice", () => 0 as Grade);
    const last = view.progress[view.progress.length - 1];
    expect(last.snapshot).toEqual(service.progress());
    expect(last.snapshot.per_annotator).toEqual({ alice: 10 });
    // one rater per task so far: nothing fully judged, kappa pending
    expect(last.snapshot.fully_judged).toBe(0);
    expect(last.agreement).toBeNull();
  });

  it("agreement appears once two tasks are fully judged", async () => {
    const service = tenTaskPool();
    await runFullSession(service, "alice", () => 1 as Grade);
    const view = await runFullSession(service, "bob", () => 1 as Grade);
    const last = view.progress[view.progress.length - 1];
    expect(last.agreement).toEqual({ kappa: 0.31, items: 10 });
  });
});
