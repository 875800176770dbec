/**
 * Export orchestration: assemble the network, enforce the 4-class head,
 * append softmax when a head lacks one, serialize the ONNX file with its
 * class-order metadata, and emit the manifest plus parity fixture.
 */

import * as fs from "node:fs";
import * as path from "node:path";

import { emitFixture, ParityFixture } from "./fixture";
import { DenseOp, Graph, outputDimension, parameterCount } from "./graph";
import {
  buildInceptionV3,
  buildTinyNet,
  bundleInit,
  CLASS_COUNT,
  ensureSoftmaxHead,
  headWidthInBundle,
  INPUT_SIDE,
  randomInit,
} from "./inception";
import { encodeOnnxModel } from "./onnx";
import { loadBundle } from "./weights";

export const CANONICAL_CLASS_ORDER = ["normal", "smoking", "calling", "smoking_calling"];

export interface ExportManifest {
  class_order: string[];
  input_shape: number[];
  preprocessing: "scale[-1,1]";
  source_weights: string;
  parity_fixture: string | null;
  parameter_count: number;
  opset: number;
  softmax_appended: boolean;
}

export interface ExportOptions {
  weights: string; // "imagenet-random-head" or a bundle path
  out: string;
  fixtureOut?: string;
  classOrder?: string[];
  seed?: number;
  architecture?: "inception-v3" | "tiny";
  log?: (message: string) => void;
}

export interface ExportResult {
  manifest: ExportManifest;
  manifestPath: string;
  fixture: ParityFixture | null;
  graph: Graph;
}

export function validateClassOrder(classOrder: string[]): void {
  const sorted = [...classOrder].sort();
  const canonical = [...CANONICAL_CLASS_ORDER].sort();
  if (sorted.length !== canonical.length || sorted.some((name, i) => name !== canonical[i])) {
    throw new Error(
      `class order must be a permutation of ${CANONICAL_CLASS_ORDER.join(",")}, got ${classOrder.join(",")}`,
    );
  }
}

/**
 * The head is assembled in canonical label order; a file exported with a
 * different class_order must emit scores in that order, so the dense head's
 * columns are permuted together with the metadata.
 */
function permuteHead(graph: Graph, classOrder: string[]): Graph {
  if (classOrder.every((name, i) => name === CANONICAL_CLASS_ORDER[i])) return graph;
  const ops = graph.ops.map((op) => {
    if (op.kind !== "dense") return op;
    const dense = op as DenseOp;
    const weights = new Float32Array(dense.weights.length);
    const bias = new Float32Array(dense.bias.length);
    for (let j = 0; j < classOrder.length; j++) {
      const src = CANONICAL_CLASS_ORDER.indexOf(classOrder[j]);
      bias[j] = dense.bias[src];
      for (let row = 0; row < dense.cin; row++) {
        weights[row * dense.cout + j] = dense.weights[row * dense.cout + src];
      }
    }
    return { ...dense, weights, bias };
  });
  return { ...graph, ops };
}

export async function exportModel(options: ExportOptions): Promise<ExportResult> {
  const log = options.log ?? (() => undefined);
  const classOrder = options.classOrder ?? CANONICAL_CLASS_ORDER;
  validateClassOrder(classOrder);

  const architecture = options.architecture ?? "inception-v3";
  const build = architecture === "tiny" ? buildTinyNet : buildInceptionV3;

  let graph: Graph;
  let sourceDescription: string;
  if (options.weights === "imagenet-random-head") {
    const seed = options.seed ?? 42;
    graph = build(randomInit(seed), CLASS_COUNT);
    sourceDescription = `randomly initialized (seed ${seed}); no trained checkpoint available`;
  } else {
    const bundle = loadBundle(options.weights);
    const headWidth = headWidthInBundle(bundle);
    if (headWidth !== null && headWidth !== CLASS_COUNT) {
      throw new Error(`weights head produces ${headWidth} classes, expected ${CLASS_COUNT}`);
    }
    graph = build(bundleInit(bundle), CLASS_COUNT);
    sourceDescription = `weights bundle ${path.basename(options.weights)}`;
  }

  const headDim = outputDimension(graph);
  if (headDim !== CLASS_COUNT) {
    throw new Error(`head produces ${headDim} classes, expected ${CLASS_COUNT}`);
  }
  graph = permuteHead(graph, classOrder);

  const { graph: finalGraph, appended } = ensureSoftmaxHead(graph);
  if (appended) log("notice: head had no softmax output; appended one");

  const params = parameterCount(finalGraph);
  log(`assembled ${architecture} with ${params.toLocaleString()} parameters`);

  const data = encodeOnnxModel(finalGraph, {
    classOrder,
    docString: "4-class behavior classifier",
    metadata: {
      parameter_count: String(params),
      source_weights: sourceDescription,
      architecture,
    },
  });
  fs.mkdirSync(path.dirname(path.resolve(options.out)), { recursive: true });
  fs.writeFileSync(options.out, data);
  log(`wrote ${options.out} (${(data.length / 1e6).toFixed(1)} MB)`);

  let fixture: ParityFixture | null = null;
  if (options.fixtureOut) {
    log("evaluating parity fixture with the reference evaluator...");
    fixture = await emitFixture(finalGraph, classOrder, options.fixtureOut, options.seed ?? 7);
    log(`fixture top-1: ${fixture.top1} (${JSON.stringify(fixture.probs)})`);
  }

  const manifest: ExportManifest = {
    class_order: classOrder,
    input_shape: [1, INPUT_SIDE, INPUT_SIDE, 3],
    preprocessing: "scale[-1,1]",
    source_weights: sourceDescription,
    parity_fixture: options.fixtureOut
      ? path.relative(path.dirname(path.resolve(options.out)), path.resolve(options.fixtureOut))
      : null,
    parameter_count: params,
    opset: 13,
    softmax_appended: appended,
  };
  const manifestPath = `${options.out.replace(/\.onnx$/, "")}.manifest.json`;
  fs.writeFileSync(manifestPath, JSON.stringify(manifest, null, 2) + "\n");
  return { manifest, manifestPath, fixture, graph: finalGraph };
}
