// Client-side reading/writing of the experiment text format, kept in
// lockstep with the server's canonical serialization so the text view and
// the grid editor can round-trip each other.  Validation of physics-level
// constraints stays on the server (/api/validate).

import {
  DEFAULT_NUM_SECONDS,
  ExperimentModel,
  Placement,
  effectiveDefault,
  emptyModel,
  kindSpec,
  sortPlacements,
} from "./model.js";

export interface ClientDiagnostic {
  line: number;
  message: string;
}

export interface ParseOutcome {
  model: ExperimentModel;
  diagnostics: ClientDiagnostic[];
}

export function parseDsl(text: string): ParseOutcome {
  const model = emptyModel();
  const diagnostics: ClientDiagnostic[] = [];
  const lines = text.split(/\r?\n/);
  lines.forEach((raw, index) => {
    const lineNo = index + 1;
    const line = raw.split("#", 1)[0];
    if (!line.trim()) return;
    if (line.trim().startsWith("<JS>")) {
      diagnostics.push({
        line: lineNo,
        message: "embedded scripting is not supported; use parameter sweeps",
      });
      return;
    }
    const segments = line.split(",");
    const head = segments[0];
    if (head.includes("=")) {
      const [name, value] = head.split("=", 2).map((s) => s.trim());
      if (name.toLowerCase() === "num_seconds") {
        const seconds = Number(value);
        if (!Number.isFinite(seconds) || seconds <= 0) {
          diagnostics.push({ line: lineNo, message: `bad num_seconds ${value}` });
        } else {
          model.numSeconds = seconds;
        }
      } else if (name.toLowerCase() === "offline_mode") {
        model.offlineMode = value.toLowerCase() === "true";
      } else {
        diagnostics.push({ line: lineNo, message: `unknown setting ${name}` });
      }
      return;
    }
    const spec = kindSpec(head);
    if (!spec) {
      diagnostics.push({ line: lineNo, message: `unknown component kind ${head.trim()}` });
      return;
    }
    const placement: Placement = {
      kind: spec.name,
      x: NaN,
      y: NaN,
      orientation: 0,
      params: {},
    };
    for (const segment of segments.slice(1)) {
      if (!segment.trim()) continue;
      const eq = segment.indexOf("=");
      if (eq < 0) {
        diagnostics.push({ line: lineNo, message: `expected key=value, got ${segment.trim()}` });
        return;
      }
      const key = segment.slice(0, eq).trim().toLowerCase();
      const value = segment.slice(eq + 1).trim();
      if (key === "x") placement.x = Number(value);
      else if (key === "y") placement.y = Number(value);
      else if (key === "orientation") placement.orientation = Number(value);
      else if (key === "id") placement.id = value;
      else {
        const field = spec.fields.find((f) => f.key === key);
        if (!field) {
          diagnostics.push({ line: lineNo, message: `unknown key ${key} for ${spec.name}` });
          return;
        }
        placement.params[key] = field.kind === "choice" ? value.toUpperCase() : Number(value);
      }
    }
    if (!Number.isFinite(placement.x) || !Number.isFinite(placement.y)) {
      diagnostics.push({ line: lineNo, message: `${spec.name} is missing x or y` });
      return;
    }
    for (const field of spec.fields) {
      if (!(field.key in placement.params)) {
        placement.params[field.key] = effectiveDefault(spec.name, field.key, placement.params);
      }
    }
    model.placements.push(placement);
  });
  model.placements = sortPlacements(model.placements);
  return { model, diagnostics };
}

function formatValue(value: number | string): string {
  if (typeof value === "string") return value;
  if (Number.isInteger(value) && Math.abs(value) < 1e15) return String(value);
  return String(value);
}

// Canonical form: settings first (only when non-default), then components in
// (y, x) order with only their non-default keys — byte-identical to the
// server's canonical_text.
export function serializeDsl(model: ExperimentModel): string {
  const lines: string[] = [];
  if (model.numSeconds !== DEFAULT_NUM_SECONDS) {
    lines.push(`num_seconds = ${formatValue(model.numSeconds)}`);
  }
  if (model.offlineMode) lines.push("offline_mode = True");
  for (const placement of sortPlacements(model.placements)) {
    const spec = kindSpec(placement.kind)!;
    const parts = [spec.name, `x=${placement.x}`, `y=${placement.y}`];
    if (placement.orientation) parts.push(`orientation=${placement.orientation}`);
    if (placement.id) parts.push(`id=${placement.id}`);
    for (const field of spec.fields) {
      const value = placement.params[field.key];
      const fallback = effectiveDefault(placement.kind, field.key, placement.params);
      if (value !== undefined && value !== fallback) {
        parts.push(`${field.key}=${formatValue(value)}`);
      }
    }
    lines.push(parts.join(", "));
  }
  return lines.length ? lines.join("\n") + "\n" : "";
}
