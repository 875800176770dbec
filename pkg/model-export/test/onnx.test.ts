import { describe, expect, it } from "vitest";

import { ConvOp } from "../src/graph";
import { buildTinyNet, randomInit } from "../src/inception";
import { decodeMetadata, encodeOnnxModel, transposeConvWeights } from "../src/onnx";

describe("transposeConvWeights", () => {
  it("maps [kh, kw, cin, cout] to [cout, cin, kh, kw]", () => {
    // 2x1 kernel, 2 in channels, 2 out channels; values encode their coordinates
    const kh = 2, kw = 1, cin = 2, cout = 2;
    const weights = new Float32Array(kh * kw * cin * cout);
    for (let ky = 0; ky < kh; ky++)
      for (let ci = 0; ci < cin; ci++)
        for (let co = 0; co < cout; co++)
          weights[(ky * cin + ci) * cout + co] = ky * 100 + ci * 10 + co;
    const op = { kh, kw, cin, cout, weights } as ConvOp;
    const out = transposeConvWeights(op);
    // out[co][ci][ky][kx]
    for (let co = 0; co < cout; co++)
      for (let ci = 0; ci < cin; ci++)
        for (let ky = 0; ky < kh; ky++)
          expect(out[((co * cin + ci) * kh + ky) * kw]).toBe(ky * 100 + ci * 10 + co);
  });
});

describe("encodeOnnxModel", () => {
  const classOrder = ["normal", "smoking", "calling", "smoking_calling"];

  it("round-trips metadata through protobuf", () => {
    const graph = buildTinyNet(randomInit(8));
    const data = encodeOnnxModel(graph, { classOrder, metadata: { note: "hello" } });
    const metadata = decodeMetadata(data);
    expect(JSON.parse(metadata.class_order)).toEqual(classOrder);
    expect(metadata.preprocessing).toBe("scale[-1,1]");
    expect(metadata.note).toBe("hello");
  });

  it("is deterministic for identical graphs", () => {
    const a = encodeOnnxModel(buildTinyNet(randomInit(8)), { classOrder });
    const b = encodeOnnxModel(buildTinyNet(randomInit(8)), { classOrder });
    expect(Buffer.from(a).equals(Buffer.from(b))).toBe(true);
  });

  it("rejects same padding with stride 2", () => {
    const graph = buildTinyNet(randomInit(8));
    const bad = {
      ...graph,
      ops: graph.ops.map((op) =>
        op.kind === "conv" && op.name === "t_stem" ? { ...op, pad: "same" as const } : op,
      ),
    };
    expect(() => encodeOnnxModel(bad, { classOrder })).toThrow(/stride-1/);
  });
});
