import { describe, expect, it } from "vitest";

import {
  appendSoftmax,
  endsWithSoftmax,
  GraphBuilder,
  outputDimension,
  parameterCount,
  WeightInit,
} from "../src/graph";
import { buildInceptionV3, buildTinyNet, randomInit } from "../src/inception";

const zeroInit: WeightInit = {
  conv: (_n, kh, kw, cin, cout) => ({
    weights: new Float32Array(kh * kw * cin * cout),
    bias: new Float32Array(cout),
  }),
  dense: (_n, cin, cout) => ({
    weights: new Float32Array(cin * cout),
    bias: new Float32Array(cout),
  }),
};

describe("GraphBuilder shape tracking", () => {
  it("computes valid and same conv output sizes", () => {
    const b = new GraphBuilder("in", { h: 299, w: 299, c: 3 }, zeroInit);
    const x = b.conv("in", 32, 3, 3, { stride: 2, pad: "valid" });
    expect(b.shapeOf(x)).toEqual({ h: 149, w: 149, c: 32 });
    const y = b.conv(x, 64, 3, 3, { pad: "same" });
    expect(b.shapeOf(y)).toEqual({ h: 149, w: 149, c: 64 });
  });

  it("concat adds channels and requires matching spatial dims", () => {
    const b = new GraphBuilder("in", { h: 8, w: 8, c: 4 }, zeroInit);
    const p = b.conv("in", 2, 1, 1);
    const q = b.conv("in", 3, 1, 1);
    const cat = b.concat([p, q]);
    expect(b.shapeOf(cat).c).toBe(5);
    const smaller = b.pool("maxpool", "in", 2, 2, "valid");
    expect(() => b.concat([p, smaller])).toThrow(/disagree/);
  });

  it("rejects dense on spatial input", () => {
    const b = new GraphBuilder("in", { h: 8, w: 8, c: 4 }, zeroInit);
    expect(() => b.dense("in", 4)).toThrow(/flat/);
  });
});

describe("inception architecture", () => {
  it("has the published layer geometry", () => {
    const graph = buildInceptionV3(zeroInit);
    // 94 convolutions plus the dense head
    const convs = graph.ops.filter((op) => op.kind === "conv");
    expect(convs.length).toBe(94);
    const params = parameterCount(graph);
    expect(params).toBeGreaterThan(21_000_000);
    expect(params).toBeLessThan(22_500_000);
    expect(outputDimension(graph)).toBe(4);
    expect(endsWithSoftmax(graph)).toBe(true);
  });

  it("tracks the canonical stage shapes", () => {
    const init = zeroInit;
    const b = new GraphBuilder("input", { h: 299, w: 299, c: 3 }, init);
    let x = b.conv("input", 32, 3, 3, { stride: 2, pad: "valid" });
    x = b.conv(x, 32, 3, 3, { pad: "valid" });
    x = b.conv(x, 64, 3, 3, { pad: "same" });
    x = b.pool("maxpool", x, 3, 2, "valid");
    x = b.conv(x, 80, 1, 1, { pad: "valid" });
    x = b.conv(x, 192, 3, 3, { pad: "valid" });
    x = b.pool("maxpool", x, 3, 2, "valid");
    expect(b.shapeOf(x)).toEqual({ h: 35, w: 35, c: 192 });
  });

  it("builds deterministically from a seed", () => {
    const a = buildTinyNet(randomInit(21));
    const b = buildTinyNet(randomInit(21));
    const convA = a.ops.find((op) => op.kind === "conv");
    const convB = b.ops.find((op) => op.kind === "conv");
    if (convA?.kind !== "conv" || convB?.kind !== "conv") throw new Error("no conv found");
    expect(Array.from(convA.weights.slice(0, 16))).toEqual(Array.from(convB.weights.slice(0, 16)));
  });
});

describe("softmax head helpers", () => {
  it("appendSoftmax adds exactly one op and rewires the output", () => {
    const graph = buildTinyNet(zeroInit);
    const withoutSoftmax = { ...graph, ops: graph.ops.slice(0, -1), outputName: graph.ops[graph.ops.length - 2].output };
    expect(endsWithSoftmax(withoutSoftmax)).toBe(false);
    const appended = appendSoftmax(withoutSoftmax);
    expect(endsWithSoftmax(appended)).toBe(true);
    expect(appended.ops.length).toBe(withoutSoftmax.ops.length + 1);
  });
});
