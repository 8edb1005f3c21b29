/**
 * Pure HTML-string renderers.
 *
 * Document bodies are shown verbatim (escaped, never truncated), and every
 * displayed count is copied straight from a service response field.
 */

import type { AgreementResponse, ProgressSnapshot, TaskAssignment } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

export const GRADE_LABELS: Record<number, string> = {
  0: "non-relevant",
  1: "relevant",
  2: "highly relevant",
};

export function renderTask(
  assignment: TaskAssignment,
  options: { selectedGrade: number | null; disabled: boolean },
): string {
  const buttons = [0, 1, 2]
    .map((grade) => {
      const selected = options.selectedGrade === grade ? " selected" : "";
      const disabled = options.disabled ? " disabled" : "";
      return (
        `<button class="grade-btn${selected}" data-grade="${grade}"${disabled}>` +
        `${grade} &ndash; ${GRADE_LABELS[grade]}</button>`
      );
    })
    .join("\n");
  return `
<article class="task">
  <p class="query"><span class="label">Query ${escapeHtml(assignment.query_id)}:</span>
    ${escapeHtml(assignment.query_text)}</p>
  <section class="document">
    <h2 class="doc-title">${escapeHtml(assignment.title)}</h2>
    <div class="doc-body">${escapeHtml(assignment.body)}</div>
    <p class="doc-meta">doc ${escapeHtml(assignment.doc_id)} &middot;
      ${assignment.outstanding_raters} rating(s) still needed</p>
  </section>
  <div class="grades">
${buttons}
    <button class="skip-btn" data-action="skip"${options.disabled ? " disabled" : ""}>skip</button>
  </div>
  <p class="hint">keys: 0 / 1 / 2 select, Enter confirms</p>
</article>`;
}

export function renderProgress(
  snapshot: ProgressSnapshot,
  agreement: AgreementResponse | null,
): string {
  const done = snapshot.fully_judged;
  const total = snapshot.total_tasks;
  const percent = total > 0 ? Math.round((100 * done) / total) : 0;
  const annotators = Object.entries(snapshot.per_annotator)
    .map(
      ([name, count]) =>
        `<tr><td>${escapeHtml(name)}</td><td class="count">${count}</td></tr>`,
    )
    .join("\n");
  const kappa =
    agreement === null
      ? '<span class="kappa pending">pending</span>'
      : `<span class="kappa">${agreement.kappa.toFixed(3)}</span>`;
  return `
<section class="progress">
  <div class="bar"><div class="fill" style="width: ${percent}%"></div></div>
  <p class="totals">${done} of ${total} tasks fully judged
    (${snapshot.total_judgments} judgments, ${snapshot.raters_per_item} raters per task)</p>
  <table class="annotators">
    <thead><tr><th>annotator</th><th>judgments</th></tr></thead>
    <tbody>
${annotators}
    </tbody>
  </table>
  <p class="agreement">Fleiss&#39; kappa: ${kappa}</p>
</section>`;
}

export function renderComplete(): string {
  return '<section class="complete"><h2>Pool complete</h2>' +
    "<p>No tasks left for this annotator. Thank you!</p></section>";
}

export function renderErrorBanner(message: string): string {
  return `<div class="banner error">${escapeHtml(message)}
  <button data-action="retry">retry</button></div>`;
}

export function renderGuidelineLink(url: string | null): string {
  if (!url) return "";
  return `<a class="guideline" href="${escapeHtml(url)}" target="_blank" rel="noopener">annotation guidelines</a>`;
}
