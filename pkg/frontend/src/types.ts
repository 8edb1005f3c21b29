/**
 * Wire types for the annotation service API.
 *
 * The UI performs no aggregation of its own: every number it shows is a
 * field from one of these responses.
 */

export interface TaskAssignment {
  query_id: string;
  query_text: string;
  doc_id: string;
  title: string;
  body: string;
  outstanding_raters: number;
}

export interface NextTaskResponse {
  task: TaskAssignment | null;
}

export interface ProgressSnapshot {
  total_tasks: number;
  fully_judged: number;
  total_judgments: number;
  raters_per_item: number;
  per_annotator: Record<string, number>;
}

export interface AgreementResponse {
  kappa: number;
  items: number;
}

export interface ConfigResponse {
  raters_per_item: number;
  total_tasks: number;
  guideline_url: string | null;
}

export type Grade = 0 | 1 | 2;

export interface JudgmentPayload {
  query_id: string;
  doc_id: string;
  annotator: string;
  grade: Grade;
}

export interface SubmitResponse {
  status: string;
  stored: boolean;
}
