import assert from "node:assert/strict";
import { test } from "node:test";

import type { TransitionResponse } from "../src/api.js";
import { buildHeatmap, formatProb } from "../src/heatmap.js";
import { fixture } from "./helpers.js";

const payload = fixture<TransitionResponse>("transition.json");
const model = buildHeatmap(payload);

// The contract for the transitions tab: every value the grid displays is the
// number the service returned, bit for bit.  Only alpha is derived, and alpha
// never feeds back into a displayed number.
test("every cell probability and count equals the service payload exactly", () => {
  const n = payload.labels.length;
  assert.equal(model.cells.length, n * n);
  for (const cell of model.cells) {
    assert.ok(Object.is(cell.prob, payload.probs[cell.row]?.[cell.col]));
    assert.ok(Object.is(cell.count, payload.counts[cell.row]?.[cell.col]));
    assert.equal(cell.from, payload.labels[cell.row]);
    assert.equal(cell.to, payload.labels[cell.col]);
  }
});

test("labels pass through in payload order, start and end markers included", () => {
  assert.deepEqual(model.labels, payload.labels);
  assert.equal(model.labels[0], "<start>");
  assert.equal(model.labels[model.labels.length - 1], "<end>");
});

test("cells are laid out row-major so the table renders without lookups", () => {
  const n = payload.labels.length;
  model.cells.forEach((cell, i) => {
    assert.equal(cell.row, Math.floor(i / n));
    assert.equal(cell.col, i % n);
  });
});

test("alpha is a presentation-only scaling into [0, 1]", () => {
  assert.ok(model.maxProb > 0);
  for (const cell of model.cells) {
    assert.ok(cell.alpha >= 0 && cell.alpha <= 1);
    // alpha is recoverable from the displayed value, never the reverse
    assert.ok(Math.abs(cell.alpha * model.maxProb - cell.prob) < 1e-12);
  }
  const brightest = model.cells.reduce((a, b) => (b.prob > a.prob ? b : a));
  assert.equal(brightest.alpha, 1);
});

test("an all-zero grid renders with zero alpha instead of dividing by zero", () => {
  const blank: TransitionResponse = {
    labels: ["a", "b"],
    counts: [
      [0, 0],
      [0, 0],
    ],
    probs: [
      [0, 0],
      [0, 0],
    ],
    config_hash: "0000000000000000",
  };
  const empty = buildHeatmap(blank);
  assert.equal(empty.maxProb, 0);
  assert.ok(empty.cells.every((c) => c.alpha === 0 && c.prob === 0));
});

test("probabilities format with three decimals for the grid", () => {
  assert.equal(formatProb(0.238), "0.238");
  assert.equal(formatProb(0), "0.000");
  assert.equal(formatProb(1), "1.000");
});

test("active rows of the payload are distributions (sanity on the fixture)", () => {
  payload.probs.forEach((row, i) => {
    const total = row.reduce((a, b) => a + b, 0);
    if (total > 0) {
      assert.ok(
        Math.abs(total - 1) < 1e-9,
        `row ${payload.labels[i]} sums to ${total}`,
      );
    }
  });
});
