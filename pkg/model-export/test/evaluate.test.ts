import { describe, expect, it } from "vitest";

import { evaluateGraph } from "../src/evaluate";
import { ConvOp, Graph, Op } from "../src/graph";

function graphOf(inputShape: { h: number; w: number; c: number }, ops: Op[], output: string): Graph {
  return { inputName: "x", inputShape, outputName: output, ops };
}

function conv(partial: Partial<ConvOp> & Pick<ConvOp, "kh" | "kw" | "cin" | "cout" | "weights">): ConvOp {
  return {
    kind: "conv",
    name: "c",
    input: "x",
    output: "y",
    stride: 1,
    pad: "valid",
    bias: new Float32Array(partial.cout),
    relu: false,
    ...partial,
  };
}

describe("conv kernel", () => {
  it("matches the hand-computed 2x2 window sums", async () => {
    const op = conv({
      kh: 2, kw: 2, cin: 1, cout: 1,
      weights: Float32Array.from([1, 1, 1, 1]),
    });
    const graph = graphOf({ h: 3, w: 3, c: 1 }, [op], "y");
    const out = await evaluateGraph(graph, Float32Array.from([1, 2, 3, 4, 5, 6, 7, 8, 9]));
    expect(Array.from(out)).toEqual([12, 16, 24, 28]);
  });

  it("same-padded delta kernel is the identity", async () => {
    const weights = new Float32Array(9);
    weights[4] = 1; // center of a 3x3 kernel, single channel
    const op = conv({ kh: 3, kw: 3, cin: 1, cout: 1, weights, pad: "same" });
    const graph = graphOf({ h: 3, w: 3, c: 1 }, [op], "y");
    const input = Float32Array.from([5, 1, 2, 8, 3, 9, 4, 7, 6]);
    const out = await evaluateGraph(graph, input);
    expect(Array.from(out)).toEqual(Array.from(input));
  });

  it("applies bias and relu", async () => {
    const op = conv({
      kh: 1, kw: 1, cin: 1, cout: 2,
      weights: Float32Array.from([1, -1]),
      bias: Float32Array.from([0.5, 0.5]),
      relu: true,
    });
    const graph = graphOf({ h: 1, w: 1, c: 1 }, [op], "y");
    const out = await evaluateGraph(graph, Float32Array.from([2]));
    expect(Array.from(out)).toEqual([2.5, 0]);
  });
});

describe("pooling kernels", () => {
  it("maxpool picks window maxima", async () => {
    const op: Op = { kind: "maxpool", name: "p", input: "x", output: "y", k: 2, stride: 2, pad: "valid" };
    const graph = graphOf({ h: 4, w: 4, c: 1 }, [op], "y");
    const input = Float32Array.from({ length: 16 }, (_, i) => i + 1);
    const out = await evaluateGraph(graph, input);
    expect(Array.from(out)).toEqual([6, 8, 14, 16]);
  });

  it("same-padded average pooling excludes padded cells", async () => {
    const op: Op = { kind: "avgpool", name: "p", input: "x", output: "y", k: 3, stride: 1, pad: "same" };
    const graph = graphOf({ h: 3, w: 3, c: 1 }, [op], "y");
    const out = await evaluateGraph(graph, new Float32Array(9).fill(1));
    expect(Array.from(out)).toEqual([1, 1, 1, 1, 1, 1, 1, 1, 1]);
  });
});

describe("head kernels", () => {
  it("global average pool reduces per channel", async () => {
    const gap: Op = { kind: "gap", name: "g", input: "x", output: "y" };
    const graph = graphOf({ h: 2, w: 2, c: 2 }, [gap], "y");
    // channels-last: [c0, c1] per pixel
    const input = Float32Array.from([0, 10, 1, 20, 2, 30, 3, 40]);
    const out = await evaluateGraph(graph, input);
    expect(Array.from(out)).toEqual([1.5, 25]);
  });

  it("dense computes x W + b", async () => {
    const ops: Op[] = [
      { kind: "gap", name: "g", input: "x", output: "flat" },
      {
        kind: "dense", name: "d", input: "flat", output: "y", cin: 2, cout: 3,
        weights: Float32Array.from([1, 0, 2, 0, 1, 3]),
        bias: Float32Array.from([10, 20, 30]),
      },
    ];
    const graph = graphOf({ h: 1, w: 1, c: 2 }, ops, "y");
    const out = await evaluateGraph(graph, Float32Array.from([1, 2]));
    expect(Array.from(out)).toEqual([11, 22, 38]);
  });

  it("softmax matches the closed form", async () => {
    const ops: Op[] = [
      { kind: "gap", name: "g", input: "x", output: "flat" },
      {
        kind: "dense", name: "d", input: "flat", output: "logits", cin: 4, cout: 4,
        weights: identity4(), bias: new Float32Array(4),
      },
      { kind: "softmax", name: "s", input: "logits", output: "y" },
    ];
    const graph = graphOf({ h: 1, w: 1, c: 4 }, ops, "y");
    const out = await evaluateGraph(graph, Float32Array.from([0, 0, 0, Math.log(3)]));
    expect(out[0]).toBeCloseTo(1 / 6, 6);
    expect(out[1]).toBeCloseTo(1 / 6, 6);
    expect(out[2]).toBeCloseTo(1 / 6, 6);
    expect(out[3]).toBeCloseTo(1 / 2, 6);
  });
});

function identity4(): Float32Array {
  const w = new Float32Array(16);
  for (let i = 0; i < 4; i++) w[i * 4 + i] = 1;
  return w;
}
