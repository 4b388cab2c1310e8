// Formatting of service-reported readings for the results panel.  Numbers
// are reshaped for display only; nothing is computed from field data here.

export function formatPower(watts: number): string {
  if (watts === 0) return "0 W";
  const units: Array<[number, string]> = [
    [1, "W"],
    [1e-3, "mW"],
    [1e-6, "uW"],
    [1e-9, "nW"],
  ];
  for (const [scale, unit] of units) {
    if (Math.abs(watts) >= scale) {
      return `${toSignificant(watts / scale, 3)} ${unit}`;
    }
  }
  return `${toSignificant(watts / 1e-9, 3)} nW`;
}

export function toSignificant(value: number, digits: number): string {
  if (value === 0) return "0";
  const magnitude = Math.floor(Math.log10(Math.abs(value)));
  const decimals = Math.max(0, digits - 1 - magnitude);
  return value.toFixed(decimals);
}

export interface PatternRow {
  pattern: string;
  count: number;
}

export function coincidenceRows(table: Record<string, number>): PatternRow[] {
  return Object.entries(table)
    .filter(([pattern]) => pattern !== "none")
    .map(([pattern, count]) => ({ pattern, count }))
    .sort(
      (a, b) =>
        a.pattern.split("+").length - b.pattern.split("+").length ||
        a.pattern.localeCompare(b.pattern),
    );
}

export function describeTotals(totals: Record<string, number>): string[] {
  return Object.entries(totals)
    .sort(([a], [b]) => a.localeCompare(b))
    .map(([label, count]) => `${label}: ${count} counts`);
}
