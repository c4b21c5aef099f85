// Severity fills, identical to the report renderer's. Cell colors derive
// from severity and nothing else.

export const SEVERITY_COLORS: Record<number, string> = {
  1: "#ABEBC6",
  2: "#F9E79F",
  3: "#F5B7B1",
};

export function severityColor(severity: number): string {
  const color = SEVERITY_COLORS[severity];
  if (!color) {
    throw new Error(`no color for severity ${severity}`);
  }
  return color;
}
