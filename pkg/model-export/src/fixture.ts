/**
 * Parity fixture: a deterministic 299x299 test image plus the reference
 * probabilities the evaluator assigns to it, recorded to 6 decimals.
 */

import * as fs from "node:fs";
import * as path from "node:path";
import { PNG } from "pngjs";

import { evaluateGraph } from "./evaluate";
import { Graph } from "./graph";
import { INPUT_SIDE } from "./inception";
import { mulberry32 } from "./rng";

/** Smooth gradients plus seeded blocky texture; every byte reproducible. */
export function fixtureImage(seed = 7): Uint8Array {
  const rand = mulberry32(seed);
  const side = INPUT_SIDE;
  const pixels = new Uint8Array(side * side * 3);
  const block = 16;
  const blocks = Math.ceil(side / block);
  const offsets = new Array(blocks * blocks * 3).fill(0).map(() => Math.floor(rand() * 96) - 48);
  for (let y = 0; y < side; y++) {
    for (let x = 0; x < side; x++) {
      const b = (Math.floor(y / block) * blocks + Math.floor(x / block)) * 3;
      const i = (y * side + x) * 3;
      pixels[i] = clampByte(64 + (x * 128) / side + offsets[b]);
      pixels[i + 1] = clampByte(64 + (y * 128) / side + offsets[b + 1]);
      pixels[i + 2] = clampByte(96 + ((x + y) * 64) / side + offsets[b + 2]);
    }
  }
  return pixels;
}

function clampByte(v: number): number {
  return Math.max(0, Math.min(255, Math.round(v)));
}

export function writePng(pixels: Uint8Array, side: number, filePath: string): void {
  const png = new PNG({ width: side, height: side });
  for (let i = 0; i < side * side; i++) {
    png.data[i * 4] = pixels[i * 3];
    png.data[i * 4 + 1] = pixels[i * 3 + 1];
    png.data[i * 4 + 2] = pixels[i * 3 + 2];
    png.data[i * 4 + 3] = 255;
  }
  fs.writeFileSync(filePath, PNG.sync.write(png));
}

/** The same scaling the consumer applies: v / 127.5 - 1. */
export function normalizePixels(pixels: Uint8Array): Float32Array {
  const out = new Float32Array(pixels.length);
  for (let i = 0; i < pixels.length; i++) out[i] = pixels[i] / 127.5 - 1.0;
  return out;
}

export interface ParityFixture {
  image: string;
  class_order: string[];
  probs: number[];
  top1: string;
}

export async function emitFixture(
  graph: Graph,
  classOrder: string[],
  outDir: string,
  seed = 7,
): Promise<ParityFixture> {
  fs.mkdirSync(outDir, { recursive: true });
  const pixels = fixtureImage(seed);
  const imageName = "fixture.png";
  writePng(pixels, INPUT_SIDE, path.join(outDir, imageName));

  const probs = await evaluateGraph(graph, normalizePixels(pixels));
  const rounded = Array.from(probs).map((p) => Number(p.toFixed(6)));
  let top = 0;
  for (let i = 1; i < probs.length; i++) if (probs[i] > probs[top]) top = i;

  const fixture: ParityFixture = {
    image: imageName,
    class_order: classOrder,
    probs: rounded,
    top1: classOrder[top],
  };
  fs.writeFileSync(path.join(outDir, "fixture.json"), JSON.stringify(fixture, null, 2) + "\n");
  return fixture;
}
