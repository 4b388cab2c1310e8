// Polarization-to-color mapping.  The six principal states have fixed named
// colors; anything else blends them with weights given by the positive parts
// of the Bloch coordinates.  Brightness follows the log of beam power.

export interface Rgb {
  r: number;
  g: number;
  b: number;
}

export const POLE_COLORS = {
  H: { r: 228, g: 26, b: 28 }, // red, +z
  V: { r: 55, g: 126, b: 184 }, // blue, -z
  D: { r: 240, g: 228, b: 66 }, // yellow, +x
  A: { r: 77, g: 175, b: 74 }, // green, -x
  R: { r: 255, g: 127, b: 0 }, // orange, +y
  L: { r: 152, g: 78, b: 163 }, // violet, -y
} as const;

export type PoleName = keyof typeof POLE_COLORS;

export function blochColor(x: number, y: number, z: number): Rgb {
  const weights: Array<[PoleName, number]> = [
    ["D", Math.max(0, x)],
    ["A", Math.max(0, -x)],
    ["R", Math.max(0, y)],
    ["L", Math.max(0, -y)],
    ["H", Math.max(0, z)],
    ["V", Math.max(0, -z)],
  ];
  let total = 0;
  for (const [, w] of weights) total += w;
  if (total <= 0) return { r: 128, g: 128, b: 128 };
  const out = { r: 0, g: 0, b: 0 };
  for (const [pole, w] of weights) {
    const c = POLE_COLORS[pole];
    out.r += (w / total) * c.r;
    out.g += (w / total) * c.g;
    out.b += (w / total) * c.b;
  }
  return { r: Math.round(out.r), g: Math.round(out.g), b: Math.round(out.b) };
}

// Log-scaled brightness between the vacuum level and a bright source.
export function beamBrightness(
  powerW: number,
  floorW = 2e-13,
  ceilW = 8e-3,
): number {
  if (!(powerW > floorW)) return 0;
  const t = (Math.log10(powerW) - Math.log10(floorW)) / (Math.log10(ceilW) - Math.log10(floorW));
  return Math.min(1, Math.max(0, t));
}

export function cssColor(color: Rgb, brightness = 1): string {
  const scale = 0.25 + 0.75 * brightness; // keep faint beams visible
  const ch = (v: number) => Math.round(v * scale);
  return `rgb(${ch(color.r)}, ${ch(color.g)}, ${ch(color.b)})`;
}
