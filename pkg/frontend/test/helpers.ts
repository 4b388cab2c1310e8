import { readFileSync } from "node:fs";

// Compiled tests run from dist/test/, fixtures live in test/fixtures/.
export function loadFixture<T>(name: string): T {
  const url = new URL(`../../test/fixtures/${name}`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export const MALUS_TEXT = `# Malus's law experiment
num_seconds = 1e-3
offline_mode = False
Laser, x=1, y=1, orientation=0
Polarizer, x=3, y=1, orientation=0, angle=30
PowerMeter, x=5, y=1
`;
