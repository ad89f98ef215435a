/**
 * Transition heatmap model: cells for a grid of P(next | current) taken
 * verbatim from /v1/corpus/transition.
 *
 * The probability placed in each cell is exactly the number the service
 * returned; only the color alpha is derived locally, and that is pure
 * presentation (the displayed value never passes through it).
 */

import type { TransitionResponse } from "./api.js";

export type HeatmapCell = {
  row: number;
  col: number;
  from: string;
  to: string;
  prob: number;
  count: number;
  /** 0..1 color intensity relative to the largest probability in the grid. */
  alpha: number;
};

export type HeatmapModel = {
  labels: string[];
  cells: HeatmapCell[];
  maxProb: number;
};

export function buildHeatmap(payload: TransitionResponse): HeatmapModel {
  let maxProb = 0;
  for (const row of payload.probs) {
    for (const p of row) {
      if (p > maxProb) maxProb = p;
    }
  }
  const cells: HeatmapCell[] = [];
  payload.labels.forEach((from, row) => {
    payload.labels.forEach((to, col) => {
      const prob = payload.probs[row]?.[col] ?? 0;
      const count = payload.counts[row]?.[col] ?? 0;
      cells.push({
        row,
        col,
        from,
        to,
        prob,
        count,
        alpha: maxProb > 0 ? prob / maxProb : 0,
      });
    });
  });
  return { labels: payload.labels, cells, maxProb };
}

/** Fixed-width probability text for a cell, e.g. "0.238". */
export function formatProb(prob: number): string {
  return prob.toFixed(3);
}
