// Experiment model shared by the editor, the DSL text view, and rendering.
// The client never computes physics: this is layout and parameter bookkeeping.

export interface ParamField {
  key: string; // DSL key
  label: string;
  kind: "number" | "int" | "choice";
  choices?: string[];
  default: number | string;
}

export interface KindSpec {
  name: string; // canonical DSL spelling
  short: string; // palette label
  fields: ParamField[];
  oriented: boolean;
}

export const KINDS: KindSpec[] = [
  {
    name: "Laser",
    short: "LAS",
    oriented: true,
    fields: [
      { key: "power", label: "power (W)", kind: "number", default: 4e-3 },
      {
        key: "polarization",
        label: "polarization",
        kind: "choice",
        choices: ["H", "V", "D", "A", "R", "L"],
        default: "H",
      },
    ],
  },
  {
    name: "LED",
    short: "LED",
    oriented: true,
    fields: [{ key: "power", label: "power (W)", kind: "number", default: 4e-3 }],
  },
  {
    name: "Polarizer",
    short: "POL",
    oriented: false,
    fields: [
      { key: "angle", label: "angle (deg)", kind: "number", default: 0 },
      { key: "phi", label: "phase (deg)", kind: "number", default: 0 },
    ],
  },
  { name: "PowerMeter", short: "PM", oriented: false, fields: [] },
  {
    name: "Detector",
    short: "DET",
    oriented: false,
    fields: [{ key: "dcr", label: "dark counts (1/s)", kind: "number", default: 1000 }],
  },
  {
    name: "BeamSplitter",
    short: "BS",
    oriented: true,
    fields: [{ key: "r", label: "reflectivity", kind: "number", default: Math.SQRT1_2 }],
  },
  { name: "Mirror", short: "MIR", oriented: true, fields: [] },
  {
    name: "PolarizingBeamSplitter",
    short: "PBS",
    oriented: true,
    fields: [
      {
        key: "basis",
        label: "basis",
        kind: "choice",
        choices: ["HV", "DA", "RL"],
        default: "HV",
      },
    ],
  },
  {
    name: "HalfWavePlate",
    short: "HWP",
    oriented: false,
    fields: [{ key: "angle", label: "fast axis (deg)", kind: "number", default: 0 }],
  },
  {
    name: "QuarterWavePlate",
    short: "QWP",
    oriented: false,
    fields: [{ key: "angle", label: "fast axis (deg)", kind: "number", default: 0 }],
  },
  {
    name: "PhaseDelay",
    short: "PD",
    oriented: false,
    fields: [{ key: "phi", label: "phase (deg)", kind: "number", default: 0 }],
  },
  { name: "Dephaser", short: "DPH", oriented: false, fields: [] },
  {
    name: "TimeDelay",
    short: "DT",
    oriented: false,
    fields: [{ key: "steps", label: "delay (steps)", kind: "int", default: 0 }],
  },
  {
    name: "Rotator",
    short: "ROT",
    oriented: false,
    fields: [{ key: "angle", label: "angle (deg)", kind: "number", default: 0 }],
  },
  {
    name: "PhaseRetarder",
    short: "RET",
    oriented: false,
    fields: [{ key: "phi", label: "phase (deg)", kind: "number", default: 0 }],
  },
  { name: "Depolarizer", short: "DPL", oriented: false, fields: [] },
  {
    name: "NeutralDensityFilter",
    short: "NDF",
    oriented: false,
    fields: [{ key: "d", label: "optical density", kind: "number", default: 10 }],
  },
  { name: "BeamBlocker", short: "BLK", oriented: false, fields: [] },
  {
    name: "EntanglementSource",
    short: "ENT",
    oriented: false,
    fields: [
      { key: "type", label: "type", kind: "choice", choices: ["I", "II"], default: "I" },
      { key: "r", label: "squeezing", kind: "number", default: 1 },
      { key: "varphi", label: "phase (deg)", kind: "number", default: 0 },
      {
        key: "directions",
        label: "directions",
        kind: "choice",
        choices: ["LR", "LU", "LD", "UR", "DR", "UD"],
        default: "LR",
      },
    ],
  },
];

export const KIND_ALIASES: Record<string, string> = {
  bs: "BeamSplitter",
  pbs: "PolarizingBeamSplitter",
  hwp: "HalfWavePlate",
  qwp: "QuarterWavePlate",
  ndf: "NeutralDensityFilter",
  ent: "EntanglementSource",
};

const BY_NAME = new Map<string, KindSpec>();
for (const spec of KINDS) {
  BY_NAME.set(spec.name.toLowerCase(), spec);
}
for (const [alias, name] of Object.entries(KIND_ALIASES)) {
  BY_NAME.set(alias, BY_NAME.get(name.toLowerCase())!);
}

export function kindSpec(name: string): KindSpec | undefined {
  return BY_NAME.get(name.trim().toLowerCase());
}

export interface Placement {
  kind: string; // canonical name
  x: number;
  y: number;
  orientation: number;
  id?: string;
  params: Record<string, number | string>;
}

export interface ExperimentModel {
  numSeconds: number;
  offlineMode: boolean;
  placements: Placement[];
}

export const DEFAULT_NUM_SECONDS = 1e-3;

export function emptyModel(): ExperimentModel {
  return { numSeconds: DEFAULT_NUM_SECONDS, offlineMode: false, placements: [] };
}

export function newPlacement(kindName: string, x: number, y: number): Placement {
  const spec = kindSpec(kindName);
  if (!spec) throw new Error(`unknown component kind ${kindName}`);
  const params: Record<string, number | string> = {};
  for (const field of spec.fields) params[field.key] = field.default;
  return { kind: spec.name, x, y, orientation: 0, params };
}

// varphi's effective default depends on the source type
export function effectiveDefault(kind: string, key: string, params: Placement["params"]): number | string {
  const spec = kindSpec(kind);
  const field = spec?.fields.find((f) => f.key === key);
  if (!field) return "";
  if (spec!.name === "EntanglementSource" && key === "varphi") {
    return params["type"] === "II" ? 180 : 0;
  }
  return field.default;
}

export function sortPlacements(placements: Placement[]): Placement[] {
  return [...placements].sort((a, b) => a.y - b.y || a.x - b.x);
}
