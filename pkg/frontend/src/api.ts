/**
 * Thin typed client over the annotation service HTTP API.
 *
 * The fetch implementation is injected so tests can run against a mocked
 * service without a DOM or network.
 */

import type {
  AgreementResponse,
  ConfigResponse,
  JudgmentPayload,
  NextTaskResponse,
  ProgressSnapshot,
  SubmitResponse,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: string,
  ) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

async function parseError(response: Response): Promise<never> {
  let detail = response.statusText;
  try {
    const payload = (await response.json()) as { detail?: string };
    if (payload.detail) detail = payload.detail;
  } catch {
    // non-JSON error body; keep the status text
  }
  throw new ApiError(response.status, detail);
}

export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike,
    private readonly baseUrl: string = "",
  ) {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path);
    if (!response.ok) await parseError(response);
    return (await response.json()) as T;
  }

  nextTask(annotator: string): Promise<NextTaskResponse> {
    const query = encodeURIComponent(annotator);
    return this.getJson<NextTaskResponse>(`/api/tasks/next?annotator=${query}`);
  }

  async submitJudgment(payload: JudgmentPayload): Promise<SubmitResponse> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/judgments`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
    if (!response.ok) await parseError(response);
    return (await response.json()) as SubmitResponse;
  }

  progress(): Promise<ProgressSnapshot> {
    return this.getJson<ProgressSnapshot>("/api/progress");
  }

  agreement(): Promise<AgreementResponse> {
    return this.getJson<AgreementResponse>("/api/agreement");
  }

  config(): Promise<ConfigResponse> {
    return this.getJson<ConfigResponse>("/api/config");
  }

  async exportQrels(): Promise<string> {
    const response = await this.fetchImpl(`${this.baseUrl}/api/qrels`);
    if (!response.ok) await parseError(response);
    return response.text();
  }
}
