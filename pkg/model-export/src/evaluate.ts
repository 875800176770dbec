/**
 * Reference evaluator: runs the graph IR with TensorFlow.js CPU kernels.
 *
 * This is the numeric source of truth for parity fixtures; the exported ONNX
 * file is executed by a completely separate runtime on the consumer side,
 * and the two must agree within 1e-3 per probability.
 */

import * as tf from "@tensorflow/tfjs";

import { Graph } from "./graph";

let backendReady: Promise<void> | null = null;

async function ensureCpuBackend(): Promise<void> {
  if (!backendReady) {
    backendReady = tf.setBackend("cpu").then(() => undefined);
  }
  await backendReady;
}

/** input: Float32Array of h*w*3 values in [-1, 1], channels-last. */
export async function evaluateGraph(graph: Graph, input: Float32Array): Promise<Float32Array> {
  await ensureCpuBackend();
  const { h, w, c } = graph.inputShape;
  if (input.length !== h * w * c) {
    throw new Error(`input has ${input.length} values, expected ${h * w * c}`);
  }
  const values = new Map<string, tf.Tensor>();
  const keep = (name: string, tensor: tf.Tensor) => values.set(name, tensor);
  keep(graph.inputName, tf.tensor4d(input, [1, h, w, c]));

  const get = (name: string): tf.Tensor => {
    const tensor = values.get(name);
    if (!tensor) throw new Error(`value ${name} not computed yet`);
    return tensor;
  };

  try {
    for (const op of graph.ops) {
      if (op.kind === "conv") {
        const filter = tf.tensor4d(op.weights, [op.kh, op.kw, op.cin, op.cout]);
        const bias = tf.tensor1d(op.bias);
        let out = tf.conv2d(get(op.input) as tf.Tensor4D, filter as tf.Tensor4D, [op.stride, op.stride], op.pad);
        out = tf.add(out, bias);
        if (op.relu) out = tf.relu(out);
        filter.dispose();
        bias.dispose();
        keep(op.output, out);
      } else if (op.kind === "maxpool") {
        keep(op.output, tf.maxPool(get(op.input) as tf.Tensor4D, op.k, op.stride, op.pad));
      } else if (op.kind === "avgpool") {
        keep(op.output, tf.avgPool(get(op.input) as tf.Tensor4D, op.k, op.stride, op.pad));
      } else if (op.kind === "concat") {
        keep(op.output, tf.concat(op.inputs.map((i) => get(i)), 3));
      } else if (op.kind === "gap") {
        keep(op.output, tf.mean(get(op.input) as tf.Tensor4D, [1, 2]));
      } else if (op.kind === "dense") {
        const weights = tf.tensor2d(op.weights, [op.cin, op.cout]);
        const bias = tf.tensor1d(op.bias);
        const out = tf.add(tf.matMul(get(op.input) as tf.Tensor2D, weights), bias);
        weights.dispose();
        bias.dispose();
        keep(op.output, out);
      } else if (op.kind === "softmax") {
        keep(op.output, tf.softmax(get(op.input) as tf.Tensor2D));
      }
    }
    const result = await (get(graph.outputName) as tf.Tensor).data();
    return Float32Array.from(result);
  } finally {
    for (const tensor of values.values()) tensor.dispose();
  }
}
