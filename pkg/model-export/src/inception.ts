/**
 * Inception-V3-style backbone assembly with a 4-class head.
 *
 * The layer recipe follows the standard published architecture: a conv stem
 * down to 35x35, three 35x35 mixed blocks, a grid reduction, four 17x17
 * blocks built from 1x7/7x1 factorized convolutions, a second reduction, two
 * 8x8 blocks with parallel 1x3/3x1 splits, then global average pooling and a
 * dense head. Batch norm is folded into conv weights, so each conv is
 * weight + bias + relu.
 */

import {
  appendSoftmax,
  endsWithSoftmax,
  Graph,
  GraphBuilder,
  WeightInit,
} from "./graph";
import { mulberry32, normalArray, uniformArray } from "./rng";
import { WeightBundle } from "./weights";

export const INPUT_SIDE = 299;
export const CLASS_COUNT = 4;

/** He-normal convs, Glorot dense, small uniform biases; fully seeded. */
export function randomInit(seed: number): WeightInit {
  const rand = mulberry32(seed);
  return {
    conv(_name, kh, kw, cin, cout) {
      const fanIn = kh * kw * cin;
      return {
        weights: normalArray(rand, kh * kw * cin * cout, Math.sqrt(2.0 / fanIn)),
        bias: uniformArray(rand, cout, -0.01, 0.01),
      };
    },
    dense(_name, cin, cout) {
      return {
        weights: normalArray(rand, cin * cout, Math.sqrt(2.0 / (cin + cout))),
        bias: uniformArray(rand, cout, -0.01, 0.01),
      };
    },
  };
}

/** Weights read from a bundle; shapes are validated against the architecture. */
export function bundleInit(bundle: WeightBundle): WeightInit {
  const take = (name: string, expectedShape: number[]): Float32Array => {
    const entry = bundle.entries.get(name);
    if (!entry) throw new Error(`weights bundle is missing tensor ${name}`);
    const wanted = expectedShape.join("x");
    const got = entry.shape.join("x");
    if (wanted !== got) {
      throw new Error(`weights bundle tensor ${name} has shape ${got}, expected ${wanted}`);
    }
    return entry.data;
  };
  return {
    conv(name, kh, kw, cin, cout) {
      return {
        weights: take(`${name}.weight`, [kh, kw, cin, cout]),
        bias: take(`${name}.bias`, [cout]),
      };
    },
    dense(name, cin, cout) {
      return {
        weights: take(`${name}.weight`, [cin, cout]),
        bias: take(`${name}.bias`, [cout]),
      };
    },
  };
}

/**
 * The dense head is always built with the bundle's own output width when one
 * is present so a malformed bundle fails the explicit head check, not a
 * shape lookup.
 */
export function headWidthInBundle(bundle: WeightBundle): number | null {
  const entry = bundle.entries.get("head.weight");
  if (!entry || entry.shape.length !== 2) return null;
  return entry.shape[1];
}

export function buildInceptionV3(init: WeightInit, classCount: number = CLASS_COUNT): Graph {
  const builder = new GraphBuilder("input", { h: INPUT_SIDE, w: INPUT_SIDE, c: 3 }, init);
  let x = builder.conv("input", 32, 3, 3, { stride: 2, pad: "valid", name: "stem_1" });
  x = builder.conv(x, 32, 3, 3, { pad: "valid", name: "stem_2" });
  x = builder.conv(x, 64, 3, 3, { pad: "same", name: "stem_3" });
  x = builder.pool("maxpool", x, 3, 2, "valid");
  x = builder.conv(x, 80, 1, 1, { pad: "valid", name: "stem_4" });
  x = builder.conv(x, 192, 3, 3, { pad: "valid", name: "stem_5" });
  x = builder.pool("maxpool", x, 3, 2, "valid");

  const block35 = (input: string, poolProj: number, tag: string): string => {
    const b1 = builder.conv(input, 64, 1, 1, { name: `${tag}_1x1` });
    let b5 = builder.conv(input, 48, 1, 1, { name: `${tag}_5x5_a` });
    b5 = builder.conv(b5, 64, 5, 5, { name: `${tag}_5x5_b` });
    let b3 = builder.conv(input, 64, 1, 1, { name: `${tag}_3x3_a` });
    b3 = builder.conv(b3, 96, 3, 3, { name: `${tag}_3x3_b` });
    b3 = builder.conv(b3, 96, 3, 3, { name: `${tag}_3x3_c` });
    let bp = builder.pool("avgpool", input, 3, 1, "same");
    bp = builder.conv(bp, poolProj, 1, 1, { name: `${tag}_pool` });
    return builder.concat([b1, b5, b3, bp]);
  };
  x = block35(x, 32, "mixed0");
  x = block35(x, 64, "mixed1");
  x = block35(x, 64, "mixed2");

  // grid reduction to 17x17
  {
    const b3 = builder.conv(x, 384, 3, 3, { stride: 2, pad: "valid", name: "mixed3_3x3" });
    let bd = builder.conv(x, 64, 1, 1, { name: "mixed3_dbl_a" });
    bd = builder.conv(bd, 96, 3, 3, { name: "mixed3_dbl_b" });
    bd = builder.conv(bd, 96, 3, 3, { stride: 2, pad: "valid", name: "mixed3_dbl_c" });
    const bp = builder.pool("maxpool", x, 3, 2, "valid");
    x = builder.concat([b3, bd, bp]);
  }

  const block17 = (input: string, mid: number, tag: string): string => {
    const b1 = builder.conv(input, 192, 1, 1, { name: `${tag}_1x1` });
    let b7 = builder.conv(input, mid, 1, 1, { name: `${tag}_7x7_a` });
    b7 = builder.conv(b7, mid, 1, 7, { name: `${tag}_7x7_b` });
    b7 = builder.conv(b7, 192, 7, 1, { name: `${tag}_7x7_c` });
    let bd = builder.conv(input, mid, 1, 1, { name: `${tag}_dbl_a` });
    bd = builder.conv(bd, mid, 7, 1, { name: `${tag}_dbl_b` });
    bd = builder.conv(bd, mid, 1, 7, { name: `${tag}_dbl_c` });
    bd = builder.conv(bd, mid, 7, 1, { name: `${tag}_dbl_d` });
    bd = builder.conv(bd, 192, 1, 7, { name: `${tag}_dbl_e` });
    let bp = builder.pool("avgpool", input, 3, 1, "same");
    bp = builder.conv(bp, 192, 1, 1, { name: `${tag}_pool` });
    return builder.concat([b1, b7, bd, bp]);
  };
  x = block17(x, 128, "mixed4");
  x = block17(x, 160, "mixed5");
  x = block17(x, 160, "mixed6");
  x = block17(x, 192, "mixed7");

  // grid reduction to 8x8
  {
    let b3 = builder.conv(x, 192, 1, 1, { name: "mixed8_3x3_a" });
    b3 = builder.conv(b3, 320, 3, 3, { stride: 2, pad: "valid", name: "mixed8_3x3_b" });
    let b7 = builder.conv(x, 192, 1, 1, { name: "mixed8_7x7_a" });
    b7 = builder.conv(b7, 192, 1, 7, { name: "mixed8_7x7_b" });
    b7 = builder.conv(b7, 192, 7, 1, { name: "mixed8_7x7_c" });
    b7 = builder.conv(b7, 192, 3, 3, { stride: 2, pad: "valid", name: "mixed8_7x7_d" });
    const bp = builder.pool("maxpool", x, 3, 2, "valid");
    x = builder.concat([b3, b7, bp]);
  }

  const block8 = (input: string, tag: string): string => {
    const b1 = builder.conv(input, 320, 1, 1, { name: `${tag}_1x1` });
    const b3root = builder.conv(input, 384, 1, 1, { name: `${tag}_3x3_a` });
    const b3a = builder.conv(b3root, 384, 1, 3, { name: `${tag}_3x3_b1` });
    const b3b = builder.conv(b3root, 384, 3, 1, { name: `${tag}_3x3_b2` });
    const b3 = builder.concat([b3a, b3b]);
    let bd = builder.conv(input, 448, 1, 1, { name: `${tag}_dbl_a` });
    bd = builder.conv(bd, 384, 3, 3, { name: `${tag}_dbl_b` });
    const bda = builder.conv(bd, 384, 1, 3, { name: `${tag}_dbl_c1` });
    const bdb = builder.conv(bd, 384, 3, 1, { name: `${tag}_dbl_c2` });
    const bdc = builder.concat([bda, bdb]);
    let bp = builder.pool("avgpool", input, 3, 1, "same");
    bp = builder.conv(bp, 192, 1, 1, { name: `${tag}_pool` });
    return builder.concat([b1, b3, bdc, bp]);
  };
  x = block8(x, "mixed9");
  x = block8(x, "mixed10");

  x = builder.globalAveragePool(x);
  x = builder.dense(x, classCount, "head");
  x = builder.softmax(x);
  return builder.finish(x);
}

/**
 * A miniature net with the same op vocabulary (conv/same+valid, both pool
 * kinds, concat, gap, dense, softmax) for fast integration tests.
 */
export function buildTinyNet(init: WeightInit, classCount: number = CLASS_COUNT): Graph {
  const builder = new GraphBuilder("input", { h: INPUT_SIDE, w: INPUT_SIDE, c: 3 }, init);
  let x = builder.conv("input", 4, 3, 3, { stride: 2, pad: "valid", name: "t_stem" });
  x = builder.pool("maxpool", x, 3, 2, "valid");
  x = builder.pool("maxpool", x, 3, 2, "valid");
  x = builder.pool("maxpool", x, 3, 2, "valid");
  const a = builder.conv(x, 4, 1, 1, { name: "t_a" });
  let b = builder.conv(x, 4, 1, 7, { name: "t_b1" });
  b = builder.conv(b, 4, 7, 1, { name: "t_b2" });
  let c = builder.pool("avgpool", x, 3, 1, "same");
  c = builder.conv(c, 2, 1, 1, { name: "t_pool" });
  x = builder.concat([a, b, c]);
  x = builder.globalAveragePool(x);
  x = builder.dense(x, classCount, "head");
  x = builder.softmax(x);
  return builder.finish(x);
}

export function ensureSoftmaxHead(graph: Graph): { graph: Graph; appended: boolean } {
  if (endsWithSoftmax(graph)) return { graph, appended: false };
  return { graph: appendSoftmax(graph), appended: true };
}
