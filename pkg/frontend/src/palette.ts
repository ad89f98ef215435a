/**
 * Category colors shared with the CLI's SVG chart output.  Keep this table in
 * sync with the server-side palette so chips and charts agree everywhere.
 */

export const LABEL_COLORS: Record<string, string> = {
  abstract: "#4c78a8",
  strength: "#59a14f",
  weakness: "#e45756",
  "rating summary": "#f58518",
  "ac disagreement": "#b279a2",
  "rebuttal process": "#72b7b2",
  suggestion: "#eeca3b",
  decision: "#9c755f",
  misc: "#9d9d9d",
};

export const FALLBACK_COLOR = "#cccccc";

export function colorFor(label: string): string {
  return LABEL_COLORS[label] ?? FALLBACK_COLOR;
}

/** All labels a chip composer can offer, in canonical display order. */
export const ALL_LABELS: string[] = Object.keys(LABEL_COLORS);
