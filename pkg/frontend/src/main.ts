// Application wiring: palette, grid canvas, parameter form, DSL text view,
// run controls, playback, and the results panel.

import { ApiClient, RunStatus } from "./api.js";
import { EditorState } from "./editor.js";
import { KINDS, Placement, kindSpec } from "./model.js";
import { PlaybackCursor } from "./playback.js";
import { CELL, canvasToGrid, drawTable } from "./render.js";
import { coincidenceRows, describeTotals, formatPower } from "./results.js";

const COLS = 26;
const ROWS = 16;

const api = new ApiClient("");
const editor = new EditorState();

const canvas = document.getElementById("table") as HTMLCanvasElement;
const ctx = canvas.getContext("2d")!;
canvas.width = COLS * CELL;
canvas.height = ROWS * CELL;

const palette = document.getElementById("palette")!;
const paramsPanel = document.getElementById("params")!;
const dslView = document.getElementById("dsl") as HTMLTextAreaElement;
const diagnosticsView = document.getElementById("diagnostics")!;
const resultsView = document.getElementById("results")!;
const stepLabel = document.getElementById("step-label")!;

let activeKind: string | null = null;
let runId: string | null = null;
let cursor: PlaybackCursor | null = null;
let lastFrame: Awaited<ReturnType<ApiClient["frame"]>> | null = null;
let pollTimer: ReturnType<typeof setInterval> | null = null;

function redraw(): void {
  drawTable(ctx, editor.model, lastFrame, editor.selected, COLS, ROWS);
  stepLabel.textContent = cursor && cursor.step >= 0 ? `step ${cursor.step}` : "";
}

async function syncTextFromModel(): Promise<void> {
  dslView.value = editor.toDsl();
  await validateNow();
  redraw();
}

async function validateNow(): Promise<void> {
  diagnosticsView.textContent = "";
  try {
    const result = await api.validate(dslView.value);
    const lines = result.diagnostics.map(
      (d) => `${d.severity}${d.line ? ` line ${d.line}` : ""}: ${d.message}`,
    );
    for (const entry of result.path_length_report) {
      lines.push(`path ${entry.source} -> ${entry.detector}: ${entry.latency_steps} steps`);
    }
    diagnosticsView.textContent = lines.join("\n");
  } catch (error) {
    diagnosticsView.textContent = String(error);
  }
}

// --- palette -------------------------------------------------------------

for (const spec of KINDS) {
  const button = document.createElement("button");
  button.textContent = spec.short;
  button.title = spec.name;
  button.addEventListener("click", () => {
    activeKind = spec.name;
    for (const other of palette.querySelectorAll("button")) {
      other.classList.toggle("active", other === button);
    }
  });
  palette.appendChild(button);
}

// --- grid interaction ----------------------------------------------------

canvas.addEventListener("click", (event) => {
  const rect = canvas.getBoundingClientRect();
  const [x, y] = canvasToGrid(event.clientX - rect.left, event.clientY - rect.top);
  const existing = editor.componentAt(x, y);
  if (existing) {
    editor.selected = existing;
    renderParams();
    redraw();
    return;
  }
  if (activeKind) {
    editor.placeComponent(activeKind, x, y);
    renderParams();
    void syncTextFromModel();
  }
});

document.getElementById("rotate")!.addEventListener("click", () => {
  editor.rotateSelected();
  void syncTextFromModel();
});

document.getElementById("delete")!.addEventListener("click", () => {
  if (editor.selected) {
    editor.removeComponent(editor.selected);
    renderParams();
    void syncTextFromModel();
  }
});

function renderParams(): void {
  paramsPanel.textContent = "";
  const placement = editor.selected;
  if (!placement) return;
  const spec = kindSpec(placement.kind)!;
  const title = document.createElement("h3");
  title.textContent = `${spec.name} @ (${placement.x}, ${placement.y})`;
  paramsPanel.appendChild(title);
  for (const field of spec.fields) {
    const label = document.createElement("label");
    label.textContent = field.label;
    let input: HTMLInputElement | HTMLSelectElement;
    if (field.kind === "choice") {
      input = document.createElement("select");
      for (const choice of field.choices ?? []) {
        const option = document.createElement("option");
        option.value = choice;
        option.textContent = choice;
        input.appendChild(option);
      }
      input.value = String(placement.params[field.key]);
    } else {
      input = document.createElement("input");
      input.type = "number";
      (input as HTMLInputElement).step = "any";
      input.value = String(placement.params[field.key]);
    }
    input.addEventListener("change", () => {
      const value = field.kind === "choice" ? input.value : Number(input.value);
      editor.setParam(placement, field.key, value);
      void syncTextFromModel();
    });
    label.appendChild(input);
    paramsPanel.appendChild(label);
  }
}

// --- DSL text view -------------------------------------------------------

dslView.addEventListener("change", () => {
  const diagnostics = editor.loadDsl(dslView.value);
  if (diagnostics.length) {
    diagnosticsView.textContent = diagnostics
      .map((d) => `error line ${d.line}: ${d.message}`)
      .join("\n");
  } else {
    renderParams();
    void validateNow();
    redraw();
  }
});

// --- runs and playback ---------------------------------------------------

function renderStatus(status: RunStatus): void {
  const lines: string[] = [`run ${status.run_id}: ${status.status} (${Math.round(status.progress * 100)}%)`];
  if (status.detector_totals) {
    lines.push(...describeTotals(status.detector_totals));
  }
  if (lastFrame && status.meter_labels.length) {
    lines.push("see meter readouts in the frame panel");
  }
  resultsView.textContent = lines.join("\n");
  if (status.coincidence_table) {
    const table = document.createElement("table");
    for (const row of coincidenceRows(status.coincidence_table)) {
      const tr = document.createElement("tr");
      tr.innerHTML = `<td>${row.pattern}</td><td>${row.count}</td>`;
      table.appendChild(tr);
    }
    resultsView.appendChild(table);
  }
}

async function refreshStatus(): Promise<RunStatus | null> {
  if (!runId) return null;
  const status = await api.runStatus(runId);
  renderStatus(status);
  if (status.status === "done" && pollTimer) {
    clearInterval(pollTimer);
    pollTimer = null;
    cursor = new PlaybackCursor((step) => api.frame(runId!, step), status.num_steps);
    lastFrame = await cursor.seek(status.num_steps - 1);
    redraw();
    void showMeters(status);
  }
  return status;
}

async function showMeters(status: RunStatus): Promise<void> {
  if (!runId || !status.meter_labels.length) return;
  const page = await api.records(runId, status.num_steps - 1, status.num_steps);
  const record = page.steps[0];
  const lines = status.meter_labels.map(
    (label) => `${label}: ${formatPower(record.powers[label] ?? 0)}`,
  );
  resultsView.textContent += "\n" + lines.join("\n");
}

document.getElementById("run")!.addEventListener("click", async () => {
  const created = await api.createRun(dslView.value, 0);
  runId = created.run_id;
  lastFrame = null;
  cursor = null;
  if (pollTimer) clearInterval(pollTimer);
  pollTimer = setInterval(() => void refreshStatus(), 200);
});

async function showFrame(promise: Promise<typeof lastFrame>): Promise<void> {
  lastFrame = await promise;
  redraw();
}

document.getElementById("step-fwd")!.addEventListener("click", () => {
  if (cursor) void showFrame(cursor.stepForward());
});
document.getElementById("step-back")!.addEventListener("click", () => {
  if (cursor) void showFrame(cursor.stepBack());
});
document.getElementById("play")!.addEventListener("click", () => {
  cursor?.play((frame) => {
    lastFrame = frame;
    redraw();
  }, 120);
});
document.getElementById("slow")!.addEventListener("click", () => {
  cursor?.play((frame) => {
    lastFrame = frame;
    redraw();
  }, 500);
});
document.getElementById("pause")!.addEventListener("click", () => cursor?.pause());

// --- boot ----------------------------------------------------------------

const STARTER = `# Malus's law experiment
num_seconds = 1e-3
Laser, x=1, y=1, orientation=0
Polarizer, x=3, y=1, orientation=0, angle=30
PowerMeter, x=5, y=1
`;

editor.loadDsl(STARTER);
dslView.value = STARTER;
void validateNow();
redraw();
