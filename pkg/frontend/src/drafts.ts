/**
 * Pure views over generate responses for the side-by-side draft panel.
 *
 * Everything in here re-arranges data the service already produced; no labels,
 * scores, or texts are computed locally.
 */

import type { DraftSentence, GenerateResponse } from "./api.js";

export type Draft = {
  /** Monotonic per-session ordinal shown in the panel header. */
  ordinal: number;
  /** Control sequence sent with the request, [] for budget (k) mode. */
  requested: string[];
  response: GenerateResponse;
};

/** Label sequence the service actually produced, one entry per sentence. */
export function chipSequence(draft: GenerateResponse): string[] {
  return draft.sentences.map((s) => s.label);
}

/** True when every produced sentence carries the label the control asked for. */
export function matchesControl(draft: GenerateResponse): boolean {
  const control = draft.control;
  if (control === null) return true;
  const produced = chipSequence(draft);
  if (produced.length !== control.length) return false;
  return produced.every((label, i) => label === control[i]);
}

/** Indices of slots the service filled by falling back outside the category. */
export function fallbackSlots(draft: GenerateResponse): number[] {
  const slots: number[] = [];
  draft.sentences.forEach((s, i) => {
    if (s.fallback) slots.push(i);
  });
  return slots;
}

/**
 * Two drafts are duplicates when the same control produced the same text —
 * the panel flags this to surface that generation is deterministic.
 */
export function isDuplicateOf(a: Draft, b: Draft): boolean {
  return (
    sameControl(a.response.control, b.response.control) &&
    a.response.text === b.response.text
  );
}

function sameControl(a: string[] | null, b: string[] | null): boolean {
  if (a === null || b === null) return a === b;
  return a.length === b.length && a.every((label, i) => label === b[i]);
}

export type SlotDiff = {
  index: number;
  left: DraftSentence | null;
  right: DraftSentence | null;
};

/**
 * Slot-by-slot comparison for highlighting: a slot differs when either side
 * is missing or the sentence text changed.  Matching slots are omitted.
 */
export function diffSlots(
  left: GenerateResponse,
  right: GenerateResponse,
): SlotDiff[] {
  const diffs: SlotDiff[] = [];
  const n = Math.max(left.sentences.length, right.sentences.length);
  for (let i = 0; i < n; i++) {
    const a = left.sentences[i] ?? null;
    const b = right.sentences[i] ?? null;
    if (a !== null && b !== null && a.text === b.text && a.label === b.label) {
      continue;
    }
    diffs.push({ index: i, left: a, right: b });
  }
  return diffs;
}

/** Number of leading slots two drafts agree on, for diff anchoring. */
export function sharedPrefixLength(
  left: GenerateResponse,
  right: GenerateResponse,
): number {
  let i = 0;
  while (
    i < left.sentences.length &&
    i < right.sentences.length &&
    left.sentences[i]?.text === right.sentences[i]?.text &&
    left.sentences[i]?.label === right.sentences[i]?.label
  ) {
    i++;
  }
  return i;
}
