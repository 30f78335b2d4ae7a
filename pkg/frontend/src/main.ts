// Annotation console controller.
//
// One active query at a time: the current segment is rendered, the human
// answers accept/reject (buttons or A/R keys), the decision round-trips
// the server, and the next query appears. Budget progress and live
// holdout accuracy come back with every response; a 410 flips to the
// completion screen, a network failure shows a retry prompt without
// losing the pending decision.

import { ApiError, createSession, finishSession, getQuery, postLabel } from "./api.js";
import { renderAccuracyChart } from "./chart.js";
import { GridFormatError, renderSegment, validateGrid } from "./render.js";
import type { Decision, SessionQuery, UISessionState } from "./types.js";

const SESSION_KEY = "cpforge-session-id";

const state: UISessionState = {
  sessionId: "",
  query: null,
  queriesMade: 0,
  budget: 0,
  accuracyHistory: [],
};

let inFlight = false;
let root: HTMLElement;

export function appState(): Readonly<UISessionState> {
  return state;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [k, v] of Object.entries(attrs)) node.setAttribute(k, v);
  if (text) node.textContent = text;
  return node;
}

function show(id: string, visible: boolean): void {
  const node = root.querySelector<HTMLElement>(`#${id}`);
  if (node) node.style.display = visible ? "" : "none";
}

function setText(id: string, text: string): void {
  const node = root.querySelector<HTMLElement>(`#${id}`);
  if (node) node.textContent = text;
}

export function mount(container: HTMLElement): void {
  root = container;
  container.innerHTML = "";
  container.appendChild(buildSetupView());
  container.appendChild(buildAnnotateView());
  container.appendChild(buildCompletionView());
  show("annotate-view", false);
  show("completion-view", false);

  document.addEventListener("keydown", (event) => {
    if (inFlight || state.query === null) return;
    if (event.key === "a" || event.key === "A") void decide("accept");
    if (event.key === "r" || event.key === "R") void decide("reject");
  });

  const resumeId = window.sessionStorage.getItem(SESSION_KEY);
  if (resumeId) {
    state.sessionId = resumeId;
    show("setup-view", false);
    show("annotate-view", true);
    void loadQuery();
  }
}

function buildSetupView(): HTMLElement {
  const view = el("div", { id: "setup-view" });
  view.appendChild(el("h1", {}, "Segment annotation"));
  const form = el("form", { id: "setup-form" });
  const fields: Array<[string, string, string]> = [
    ["dataset", "Dataset file", "dataset.jsonl"],
    ["clusters", "Cluster report", "clusters.json"],
    ["budget", "Budget", "50"],
    ["seed", "Seed", "0"],
  ];
  for (const [name, label, value] of fields) {
    const row = el("label", {}, `${label} `);
    const input = el("input", { id: `setup-${name}`, name, value });
    row.appendChild(input);
    form.appendChild(row);
    form.appendChild(el("br"));
  }
  const start = el("button", { id: "btn-start", type: "submit" }, "Start session");
  form.appendChild(start);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    void startSession();
  });
  view.appendChild(form);
  view.appendChild(el("p", { id: "setup-error", class: "error" }));
  return view;
}

function buildAnnotateView(): HTMLElement {
  const view = el("div", { id: "annotate-view" });
  view.appendChild(el("div", { id: "error-banner", class: "error" }));
  const retry = el("div", { id: "retry-banner" });
  retry.appendChild(el("span", {}, "Network problem; nothing was lost. "));
  retry.appendChild(el("button", { id: "btn-retry" }, "Retry"));
  view.appendChild(retry);

  view.appendChild(el("p", { id: "progress-text" }));
  view.appendChild(el("p", { id: "accuracy-text" }));

  const canvas = el("canvas", {
    id: "segment-canvas",
    width: "448",
    height: "392",
  });
  view.appendChild(canvas);

  const legend = el("p", { id: "legend" });
  legend.textContent =
    "ground brown · platform gray · enemy red · coin yellow · pipe green · air sky";
  view.appendChild(legend);

  const buttons = el("div", { id: "decision-buttons" });
  const accept = el("button", { id: "btn-accept" }, "Accept (A)");
  const reject = el("button", { id: "btn-reject" }, "Reject (R)");
  accept.addEventListener("click", () => void decide("accept"));
  reject.addEventListener("click", () => void decide("reject"));
  buttons.appendChild(accept);
  buttons.appendChild(reject);
  view.appendChild(buttons);

  const chart = document.createElementNS("http://www.w3.org/2000/svg", "svg");
  chart.setAttribute("id", "accuracy-chart");
  chart.setAttribute("width", "320");
  chart.setAttribute("height", "80");
  view.appendChild(chart);
  return view;
}

function buildCompletionView(): HTMLElement {
  const view = el("div", { id: "completion-view" });
  view.appendChild(el("h1", {}, "Budget spent - session complete"));
  view.appendChild(el("p", { id: "completion-summary" }));
  const finish = el("button", { id: "btn-finish" }, "Finish: save model and labels");
  finish.addEventListener("click", () => void finish_());
  view.appendChild(finish);
  view.appendChild(el("pre", { id: "finish-paths" }));
  return view;
}

async function startSession(): Promise<void> {
  const value = (name: string) =>
    root.querySelector<HTMLInputElement>(`#setup-${name}`)?.value ?? "";
  try {
    const created = await createSession({
      dataset: value("dataset"),
      clusters: value("clusters"),
      budget: Number(value("budget")),
      seed: Number(value("seed")),
    });
    state.sessionId = created.session_id;
    state.accuracyHistory = [];
    window.sessionStorage.setItem(SESSION_KEY, state.sessionId);
    show("setup-view", false);
    show("annotate-view", true);
    await loadQuery();
  } catch (err) {
    setText("setup-error", err instanceof Error ? err.message : String(err));
  }
}

async function loadQuery(): Promise<void> {
  setText("error-banner", "");
  show("retry-banner", false);
  try {
    const query = await getQuery(state.sessionId);
    state.query = query;
    state.queriesMade = query.queries_made;
    state.budget = query.budget;
    drawQuery(query);
  } catch (err) {
    if (err instanceof ApiError && err.status === 410) {
      completeSession();
    } else if (err instanceof ApiError) {
      state.query = null;
      setText("error-banner", `${err.errorName}: ${err.message}`);
    } else {
      offerRetry(() => loadQuery());
    }
  }
}

function drawQuery(query: SessionQuery): void {
  setText(
    "progress-text",
    `Query ${query.queries_made + 1} of ${query.budget} (segment #${query.segment_id})`,
  );
  setText(
    "accuracy-text",
    `Holdout accuracy so far: ${(query.holdout_accuracy * 100).toFixed(1)}%`,
  );
  const canvas = root.querySelector<HTMLCanvasElement>("#segment-canvas");
  try {
    validateGrid(query.grid);
    const ctx = canvas?.getContext("2d");
    if (ctx) renderSegment(ctx, query.grid);
  } catch (err) {
    if (err instanceof GridFormatError) {
      state.query = null; // never label a segment that did not render
      setText("error-banner", `Malformed segment: ${err.message}`);
      return;
    }
    throw err;
  }
  const chart = root.querySelector<SVGSVGElement>("#accuracy-chart");
  if (chart) renderAccuracyChart(chart, state.accuracyHistory);
}

async function decide(label: Decision): Promise<void> {
  if (inFlight || state.query === null) return; // double-submit guard
  const segmentId = state.query.segment_id;
  inFlight = true;
  setButtonsEnabled(false);
  try {
    const result = await postLabel(state.sessionId, segmentId, label);
    state.accuracyHistory.push(result.holdout_accuracy);
    state.queriesMade = result.queries_made;
    state.query = null;
    await loadQuery();
  } catch (err) {
    if (err instanceof ApiError && err.status === 409) {
      // already recorded (double click raced); just move on
      state.query = null;
      await loadQuery();
    } else if (err instanceof ApiError && err.status === 410) {
      completeSession();
    } else if (err instanceof ApiError) {
      setText("error-banner", `${err.errorName}: ${err.message}`);
    } else {
      offerRetry(() => decide(label));
    }
  } finally {
    inFlight = false;
    setButtonsEnabled(true);
  }
}

function setButtonsEnabled(enabled: boolean): void {
  for (const id of ["btn-accept", "btn-reject"]) {
    const button = root.querySelector<HTMLButtonElement>(`#${id}`);
    if (button) button.disabled = !enabled;
  }
}

function offerRetry(action: () => Promise<void>): void {
  show("retry-banner", true);
  const button = root.querySelector<HTMLButtonElement>("#btn-retry");
  if (button) {
    button.onclick = () => {
      show("retry-banner", false);
      void action();
    };
  }
}

function completeSession(): void {
  state.query = null;
  show("annotate-view", false);
  show("completion-view", true);
  setText(
    "completion-summary",
    `${state.queriesMade} segments labeled. Save the trained model to finish.`,
  );
}

async function finish_(): Promise<void> {
  try {
    const result = await finishSession(state.sessionId);
    setText(
      "finish-paths",
      `model: ${result.model_path}\nlabels: ${result.labeled_path}\ncurve: ${result.curve_path}`,
    );
    window.sessionStorage.removeItem(SESSION_KEY);
  } catch (err) {
    setText("finish-paths", err instanceof Error ? err.message : String(err));
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
