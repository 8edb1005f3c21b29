/**
 * Annotation session controller: fetch a task, collect a grade, submit,
 * advance. Holds no derived numbers of its own; views receive service
 * responses verbatim.
 *
 * Failure handling: a failed request keeps the current task and the
 * selected grade, shows a retry banner, and retries the same operation,
 * so nothing an annotator entered is ever lost.
 */

import { ApiClient, ApiError } from "./api.js";
import type {
  AgreementResponse,
  Grade,
  ProgressSnapshot,
  TaskAssignment,
} from "./types.js";

export interface SessionView {
  showTask(task: TaskAssignment, selectedGrade: Grade | null, disabled: boolean): void;
  showComplete(): void;
  showProgress(snapshot: ProgressSnapshot, agreement: AgreementResponse | null): void;
  showError(message: string): void;
  clearError(): void;
}

type FailedOp = "load" | "submit" | null;

export class AnnotationSession {
  current: TaskAssignment | null = null;
  selectedGrade: Grade | null = null;
  complete = false;
  private submitting = false;
  private lastFailure: FailedOp = null;

  constructor(
    private readonly api: ApiClient,
    readonly annotator: string,
    private readonly view: SessionView,
  ) {}

  async start(): Promise<void> {
    await this.refreshProgress();
    await this.loadNext();
  }

  async loadNext(): Promise<void> {
    try {
      const response = await this.api.nextTask(this.annotator);
      this.view.clearError();
      this.lastFailure = null;
      this.current = response.task;
      this.selectedGrade = null;
      if (this.current === null) {
        this.complete = true;
        this.view.showComplete();
      } else {
        this.view.showTask(this.current, null, false);
      }
    } catch (error) {
      this.lastFailure = "load";
      this.view.showError(describe(error));
    }
  }

  selectGrade(grade: Grade): void {
    if (this.current === null || this.submitting) return;
    this.selectedGrade = grade;
    this.view.showTask(this.current, grade, false);
  }

  async confirm(): Promise<void> {
    if (this.current === null || this.selectedGrade === null || this.submitting) {
      return;
    }
    const task = this.current;
    const grade = this.selectedGrade;
    this.submitting = true;
    // buttons stay disabled until the next task has loaded
    this.view.showTask(task, grade, true);
    try {
      await this.api.submitJudgment({
        query_id: task.query_id,
        doc_id: task.doc_id,
        annotator: this.annotator,
        grade,
      });
      this.lastFailure = null;
      this.view.clearError();
    } catch (error) {
      this.submitting = false;
      if (error instanceof ApiError && error.status === 409) {
        // lost an assignment race; the task is complete, move along
        await this.refreshProgress();
        await this.loadNext();
        return;
      }
      this.lastFailure = "submit";
      this.view.showError(describe(error));
      this.view.showTask(task, grade, false);
      return;
    }
    this.submitting = false;
    await this.refreshProgress();
    await this.loadNext();
  }

  async skip(): Promise<void> {
    if (this.current === null || this.submitting) return;
    await this.loadNext();
  }

  async retry(): Promise<void> {
    if (this.lastFailure === "submit") {
      await this.confirm();
    } else {
      await this.loadNext();
    }
  }

  async refreshProgress(): Promise<void> {
    let snapshot: ProgressSnapshot;
    try {
      snapshot = await this.api.progress();
    } catch {
      return; // progress is cosmetic; the next refresh will catch up
    }
    let agreement: AgreementResponse | null = null;
    try {
      agreement = await this.api.agreement();
    } catch {
      agreement = null; // shown as pending until enough tasks are complete
    }
    this.view.showProgress(snapshot, agreement);
  }

  /** Keyboard path: 0/1/2 select a grade, Enter confirms. */
  async handleKey(key: string): Promise<void> {
    if (key === "0" || key === "1" || key === "2") {
      this.selectGrade(Number(key) as Grade);
    } else if (key === "Enter") {
      await this.confirm();
    }
  }
}

function describe(error: unknown): string {
  if (error instanceof ApiError) return error.message;
  if (error instanceof Error) return `request failed: ${error.message}`;
  return "request failed";
}
