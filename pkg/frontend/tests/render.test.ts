import { describe, expect, it } from "vitest";

import { arrowGlyphs } from "../src/render.js";
import type { Field } from "../src/field.js";

function uniformField(u: number, v: number, size = 256): Field {
  const data = new Float32Array(size * size * 2);
  for (let k = 0; k < data.length; k += 2) {
    data[k] = u;
    data[k + 1] = v;
  }
  return { width: size, height: size, data };
}

describe("arrow glyphs", () => {
  it("samples on the 16-cell lattice", () => {
    const arrows = arrowGlyphs(uniformField(1, 0), 512);
    expect(arrows.length).toBe(16 * 16);
  });

  it("zero field draws nothing", () => {
    expect(arrowGlyphs(uniformField(0, 0), 512)).toEqual([]);
  });

  it("lengths are magnitude-scaled and clamped", () => {
    const size = 256;
    const data = new Float32Array(size * size * 2);
    for (let y = 0; y < size; y++) {
      for (let x = 0; x < size; x++) {
        const k = 2 * (y * size + x);
        data[k] = x < size / 2 ? 0.5 : 4.0; // two magnitude bands
      }
    }
    const field: Field = { width: size, height: size, data };
    const canvas = 512;
    const arrows = arrowGlyphs(field, canvas);
    const lengths = arrows.map((a) => Math.hypot(a.x1 - a.x0, a.y1 - a.y0));
    const maxLen = 0.9 * 16 * (canvas / size);
    expect(Math.max(...lengths)).toBeLessThanOrEqual(maxLen + 1e-9);
    // the weak half is an eighth of the strong half
    const short = Math.min(...lengths);
    expect(short).toBeCloseTo(maxLen * 0.125, 6);
  });

  it("arrows point along the flow", () => {
    const arrows = arrowGlyphs(uniformField(0, 2), 512);
    for (const arrow of arrows) {
      expect(arrow.y1).toBeGreaterThan(arrow.y0);
      expect(arrow.x1).toBeCloseTo(arrow.x0, 9);
    }
  });
});
