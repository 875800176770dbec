import { describe, expect, it } from "vitest";

import { gaussian, mulberry32, normalArray, uniformArray } from "../src/rng";

describe("mulberry32", () => {
  it("is deterministic for a given seed", () => {
    const a = mulberry32(123);
    const b = mulberry32(123);
    for (let i = 0; i < 100; i++) expect(a()).toBe(b());
  });

  it("differs across seeds", () => {
    expect(mulberry32(1)()).not.toBe(mulberry32(2)());
  });

  it("stays in [0, 1)", () => {
    const rand = mulberry32(7);
    for (let i = 0; i < 10_000; i++) {
      const v = rand();
      expect(v).toBeGreaterThanOrEqual(0);
      expect(v).toBeLessThan(1);
    }
  });
});

describe("gaussian", () => {
  it("has roughly standard moments", () => {
    const gauss = gaussian(mulberry32(99));
    const n = 50_000;
    let sum = 0;
    let sumSq = 0;
    for (let i = 0; i < n; i++) {
      const v = gauss();
      sum += v;
      sumSq += v * v;
    }
    const mean = sum / n;
    const variance = sumSq / n - mean * mean;
    expect(Math.abs(mean)).toBeLessThan(0.02);
    expect(Math.abs(variance - 1)).toBeLessThan(0.05);
  });
});

describe("array helpers", () => {
  it("normalArray scales by the requested std", () => {
    const values = normalArray(mulberry32(3), 20_000, 0.1);
    let sumSq = 0;
    for (const v of values) sumSq += v * v;
    expect(Math.sqrt(sumSq / values.length)).toBeCloseTo(0.1, 2);
  });

  it("uniformArray respects bounds", () => {
    const values = uniformArray(mulberry32(4), 1000, -0.5, 0.5);
    for (const v of values) {
      expect(v).toBeGreaterThanOrEqual(-0.5);
      expect(v).toBeLessThan(0.5);
    }
  });
});
