/**
 * Browser bootstrap: binds the session controller to the static page.
 * The annotator token is the only thing kept client-side.
 */

import { ApiClient } from "./api.js";
import {
  renderComplete,
  renderErrorBanner,
  renderGuidelineLink,
  renderProgress,
  renderTask,
} from "./render.js";
import { AnnotationSession, type SessionView } from "./session.js";
import type { Grade } from "./types.js";

const TOKEN_KEY = "rejudge-annotator";

function byId(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) throw new Error(`missing #${id}`);
  return element;
}

function startSession(annotator: string): void {
  localStorage.setItem(TOKEN_KEY, annotator);
  byId("login").hidden = true;
  byId("workbench").hidden = false;
  byId("whoami").textContent = annotator;

  const api = new ApiClient((input, init) => fetch(input, init));
  const taskPane = byId("task");
  const progressPane = byId("progress");
  const errorPane = byId("error");

  const view: SessionView = {
    showTask(task, selectedGrade, disabled) {
      taskPane.innerHTML = renderTask(task, { selectedGrade, disabled });
    },
    showComplete() {
      taskPane.innerHTML = renderComplete();
    },
    showProgress(snapshot, agreement) {
      progressPane.innerHTML = renderProgress(snapshot, agreement);
    },
    showError(message) {
      errorPane.innerHTML = renderErrorBanner(message);
    },
    clearError() {
      errorPane.innerHTML = "";
    },
  };

  const session = new AnnotationSession(api, annotator, view);

  taskPane.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.grade !== undefined) {
      session.selectGrade(Number(target.dataset.grade) as Grade);
    } else if (target.dataset.action === "skip") {
      void session.skip();
    }
  });
  taskPane.addEventListener("dblclick", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.grade !== undefined) void session.confirm();
  });
  errorPane.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.dataset.action === "retry") void session.retry();
  });
  document.addEventListener("keydown", (event) => {
    if ((event.target as HTMLElement).tagName === "INPUT") return;
    void session.handleKey(event.key);
  });

  api
    .config()
    .then((config) => {
      byId("guideline").innerHTML = renderGuidelineLink(config.guideline_url);
    })
    .catch(() => {
      /* optional */
    });

  void session.start();
}

function init(): void {
  const stored = localStorage.getItem(TOKEN_KEY);
  const input = byId("token-input") as HTMLInputElement;
  if (stored) input.value = stored;
  byId("login-form").addEventListener("submit", (event) => {
    event.preventDefault();
    const token = input.value.trim();
    if (token) startSession(token);
  });
}

document.addEventListener("DOMContentLoaded", init);
