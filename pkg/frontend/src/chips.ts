/**
 * Chip composer state: an ordered sequence of category labels that becomes
 * the `control` argument of a generate request.
 *
 * Duplicates are legal and meaningful — two adjacent "abstract" chips ask for
 * a two-sentence abstract.  The only invalid sequence is the empty one, which
 * disables the generate button rather than erroring.
 */

export type ChipSequence = string[];

export function appendChip(chips: ChipSequence, label: string): ChipSequence {
  return [...chips, label];
}

export function removeChip(chips: ChipSequence, index: number): ChipSequence {
  if (index < 0 || index >= chips.length) return [...chips];
  return [...chips.slice(0, index), ...chips.slice(index + 1)];
}

/** Move the chip at `from` so it lands at position `to`, preserving order. */
export function moveChip(
  chips: ChipSequence,
  from: number,
  to: number,
): ChipSequence {
  if (from < 0 || from >= chips.length) return [...chips];
  const bounded = Math.max(0, Math.min(chips.length - 1, to));
  const next = [...chips];
  const [chip] = next.splice(from, 1);
  next.splice(bounded, 0, chip as string);
  return next;
}

export function clearChips(): ChipSequence {
  return [];
}

/** A generate request needs at least one chip; nothing else is validated here. */
export function canGenerate(chips: ChipSequence): boolean {
  return chips.length > 0;
}

/** Human-readable form used in draft headers, e.g. "abstract | decision". */
export function surfaceForm(chips: ChipSequence): string {
  return chips.join(" | ");
}
