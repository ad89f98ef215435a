/**
 * DOM construction helpers.  Each function builds one widget from an
 * already-fetched payload or view model; none of them talk to the network.
 */

import type { GenerateResponse, StatsResponse } from "./api.js";
import { chipSequence, diffSlots, fallbackSlots, type Draft } from "./drafts.js";
import { formatProb, type HeatmapModel } from "./heatmap.js";
import { colorFor } from "./palette.js";

export function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function labelChip(label: string, fallback = false): HTMLElement {
  const chip = el("span", fallback ? "chip chip-fallback" : "chip", label);
  chip.style.setProperty("--chip-color", colorFor(label));
  if (fallback) chip.title = "fallback slot: no sentence of this category was available";
  return chip;
}

export function composerChip(
  label: string,
  onRemove: () => void,
): HTMLElement {
  const chip = labelChip(label);
  chip.classList.add("chip-removable");
  const button = el("button", "chip-remove", "×");
  button.type = "button";
  button.setAttribute("aria-label", `remove ${label}`);
  button.addEventListener("click", onRemove);
  chip.appendChild(button);
  return chip;
}

export function paletteButton(
  label: string,
  onAdd: () => void,
): HTMLElement {
  const button = el("button", "palette-chip", label);
  button.type = "button";
  button.style.setProperty("--chip-color", colorFor(label));
  button.addEventListener("click", onAdd);
  return button;
}

export type DraftFlags = {
  duplicateOf: number | null;
  diffAgainst: GenerateResponse | null;
};

export function draftCard(draft: Draft, flags: DraftFlags): HTMLElement {
  const card = el("article", "draft");
  const header = el("header", "draft-header");
  header.appendChild(el("span", "draft-ordinal", `draft ${draft.ordinal}`));

  const control = draft.response.control;
  header.appendChild(
    el(
      "span",
      "draft-control",
      control === null ? `budget: ${draft.response.sentences.length}` : control.join(" | "),
    ),
  );
  if (flags.duplicateOf !== null) {
    const dup = el(
      "span",
      "draft-duplicate",
      `identical to draft ${flags.duplicateOf}`,
    );
    dup.title = "same control, same output: generation is deterministic";
    header.appendChild(dup);
  }
  card.appendChild(header);

  const fallbacks = new Set(fallbackSlots(draft.response));
  const differing = new Set(
    flags.diffAgainst === null
      ? []
      : diffSlots(flags.diffAgainst, draft.response).map((d) => d.index),
  );

  const body = el("div", "draft-body");
  draft.response.sentences.forEach((sentence, i) => {
    const slot = el("p", "slot");
    if (differing.has(i)) slot.classList.add("slot-differs");
    slot.appendChild(labelChip(sentence.label, fallbacks.has(i)));
    slot.appendChild(el("span", "slot-text", sentence.text));
    body.appendChild(slot);
  });
  card.appendChild(body);

  for (const warning of draft.response.warnings) {
    card.appendChild(el("p", "draft-warning", warning));
  }
  return card;
}

export function heatmapTable(model: HeatmapModel): HTMLElement {
  const table = el("table", "heatmap");
  const head = el("tr");
  head.appendChild(el("th"));
  for (const label of model.labels) {
    head.appendChild(el("th", "heatmap-col", label));
  }
  table.appendChild(head);

  model.labels.forEach((from, row) => {
    const tr = el("tr");
    tr.appendChild(el("th", "heatmap-row", from));
    for (let col = 0; col < model.labels.length; col++) {
      const cell = model.cells[row * model.labels.length + col];
      const td = el("td", "heatmap-cell");
      if (cell) {
        td.textContent = formatProb(cell.prob);
        td.title = `${cell.from} → ${cell.to}: ${cell.prob} (${cell.count} observed)`;
        td.style.setProperty("--cell-alpha", String(cell.alpha));
      }
      tr.appendChild(td);
    }
    table.appendChild(tr);
  });
  return table;
}

export function statsSummary(stats: StatsResponse): HTMLElement {
  const list = el("dl", "stats");
  const pairs: [string, string][] = [
    ["submissions", String(stats.n_submissions)],
    ["reviews", String(stats.n_reviews)],
    ["labeled sentences", String(stats.n_labeled_sentences)],
  ];
  for (const [split, count] of Object.entries(stats.splits)) {
    pairs.push([`${split} split`, String(count)]);
  }
  for (const [term, value] of pairs) {
    list.appendChild(el("dt", undefined, term));
    list.appendChild(el("dd", undefined, value));
  }
  return list;
}
