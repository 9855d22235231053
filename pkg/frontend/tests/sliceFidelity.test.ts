import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { countSvgCells } from "../src/sliceHistogram";
import type { SliceStackJson } from "../src/types";

// Recorded from the real HTTP service (scripts/record_fixtures.py): the
// slice SVGs and the JSON stack for one generated session.
const FIXTURES = join(fileURLToPath(new URL(".", import.meta.url)), "fixtures");
const stack = JSON.parse(readFileSync(join(FIXTURES, "slices.json"), "utf-8")) as SliceStackJson;

describe("slice fidelity (acceptance)", () => {
  it("fixture covers a non-trivial generation", () => {
    expect(stack.layers.length).toBe(stack.nx);
    const occupied = stack.layers.reduce((acc, l) => acc + l.histogram.occupied, 0);
    expect(occupied).toBeGreaterThan(0);
  });

  it("rendered per-color cell counts equal the JSON histogram for every layer", () => {
    for (const layer of stack.layers) {
      const svg = readFileSync(join(FIXTURES, `slice_${String(layer.index).padStart(3, "0")}.svg`), "utf-8");
      const counts = countSvgCells(svg);
      expect(counts, `layer ${layer.index}`).toEqual(layer.histogram);
      expect(counts.occupied + counts.foam_plus + counts.foam_minus).toBe(stack.ny * stack.nz);
    }
  });

  it("histograms agree with the raw label grids", () => {
    for (const layer of stack.layers) {
      let occupied = 0,
        plus = 0,
        minus = 0;
      for (const row of layer.labels) {
        for (const v of row) {
          if (v === 0) occupied += 1;
          else if (v === 1) plus += 1;
          else minus += 1;
        }
      }
      expect({ occupied, foam_plus: plus, foam_minus: minus }).toEqual(layer.histogram);
    }
  });
});
