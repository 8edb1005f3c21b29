/** Client error propagation and the no-data-loss retry path. */

import { describe, expect, it } from "vitest";

import { ApiClient, ApiError, type FetchLike } from "../src/api.js";
import { AnnotationSession } from "../src/session.js";
import type { Grade } from "../src/types.js";
import { tenTaskPool } from "./mock-service.js";

class StubView {
  errors: string[] = [];
  cleared = 0;
  showTask(): void {}
  showComplete(): void {}
  showProgress(): void {}
  showError(message: string): void {
    this.errors.push(message);
  }
  clearError(): void {
    this.cleared += 1;
  }
}

describe("ApiClient", () => {
  it("raises ApiError with status and detail", async () => {
    const failing: FetchLike = async () =>
      new Response(JSON.stringify({ detail: "task is not in the pool" }), {
        status: 403,
        headers: { "Content-Type": "application/json" },
      });
    const api = new ApiClient(failing);
    await expect(
      api.submitJudgment({ query_id: "q", doc_id: "d", annotator: "a", grade: 1 }),
    ).rejects.toMatchObject({ status: 403, detail: "task is not in the pool" });
  });

  it("encodes the annotator token", async () => {
    let seen = "";
    const spy: FetchLike = async (input) => {
      seen = input;
      return new Response(JSON.stringify({ task: null }), {
        status: 200,
        headers: { "Content-Type": "application/json" },
      });
    };
    await new ApiClient(spy).nextTask("ann with space");
    expect(seen).toContain("annotator=ann%20with%20space");
  });

  it("exportQrels returns the raw TSV text", async () => {
    const service = tenTaskPool();
    const api = new ApiClient(service.makeFetch());
    const text = await api.exportQrels();
    expect(text.startsWith("query-id\tcorpus-id\tscore\n")).toBe(true);
  });
});

describe("retry without data loss", () => {
  it("a failed submit keeps the grade and resubmits exactly once", async () => {
    const service = tenTaskPool();
    const real = service.makeFetch();
    let failNextPost = false;
    const flaky: FetchLike = async (input, init) => {
      if (failNextPost && init?.method === "POST") {
        failNextPost = false;
        throw new Error("network down");
      }
      return real(input, init);
    };
    const view = new StubView();
    const session = new AnnotationSession(new ApiClient(flaky), "ann", view);
    await session.start();
    const task = session.current;
    expect(task).not.toBeNull();

    failNextPost = true;
    session.selectGrade(2 as Grade);
    await session.confirm();
    expect(view.errors.length).toBe(1);
    expect(service.log.length).toBe(0); // nothing reached the service
    expect(session.current?.doc_id).toBe(task?.doc_id); // task retained
    expect(session.selectedGrade).toBe(2); // grade retained

    await session.retry();
    expect(service.log.length).toBe(1);
    expect(service.log[0]).toMatchObject({
      query_id: task?.query_id,
      doc_id: task?.doc_id,
      grade: 2,
    });
    // session moved on to a different task after the successful retry
    expect(session.current?.doc_id).not.toBe(task?.doc_id);
  });

  it("a failed load shows a banner and retry fetches the task", async () => {
    const service = tenTaskPool();
    const real = service.makeFetch();
    let failNext = true;
    const flaky: FetchLike = async (input, init) => {
      if (failNext && String(input).includes("/api/tasks/next")) {
        failNext = false;
        throw new Error("offline");
      }
      return real(input, init);
    };
    const view = new StubView();
    const session = new AnnotationSession(new ApiClient(flaky), "ann", view);
    await session.start();
    expect(view.errors.length).toBe(1);
    expect(session.current).toBeNull();
    await session.retry();
    expect(session.current).not.toBeNull();
  });

  it("ApiError formats a readable message", () => {
    const error = new ApiError(409, "task is fully judged");
    expect(error.message).toBe("HTTP 409: task is fully judged");
  });
});
