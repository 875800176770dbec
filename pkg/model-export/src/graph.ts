/**
 * Channels-last graph IR for feed-forward classifier networks.
 *
 * Batch norm is folded away at assembly time: every conv carries an explicit
 * bias and is optionally followed by a relu. The IR is what both the ONNX
 * serializer and the reference evaluator consume, so the two stay in sync by
 * construction while executing through entirely different code paths.
 */

export type Padding = "same" | "valid";

export interface ConvOp {
  kind: "conv";
  name: string;
  input: string;
  output: string;
  kh: number;
  kw: number;
  stride: number;
  pad: Padding;
  cin: number;
  cout: number;
  /** layout [kh, kw, cin, cout] */
  weights: Float32Array;
  bias: Float32Array;
  relu: boolean;
}

export interface PoolOp {
  kind: "maxpool" | "avgpool";
  name: string;
  input: string;
  output: string;
  k: number;
  stride: number;
  pad: Padding;
}

export interface ConcatOp {
  kind: "concat";
  name: string;
  inputs: string[];
  output: string;
}

export interface GlobalAvgPoolOp {
  kind: "gap";
  name: string;
  input: string;
  output: string;
}

export interface DenseOp {
  kind: "dense";
  name: string;
  input: string;
  output: string;
  cin: number;
  cout: number;
  /** layout [cin, cout] */
  weights: Float32Array;
  bias: Float32Array;
}

export interface SoftmaxOp {
  kind: "softmax";
  name: string;
  input: string;
  output: string;
}

export type Op = ConvOp | PoolOp | ConcatOp | GlobalAvgPoolOp | DenseOp | SoftmaxOp;

export interface SpatialShape {
  h: number;
  w: number;
  c: number;
}

export interface Graph {
  inputName: string;
  inputShape: SpatialShape;
  outputName: string;
  ops: Op[];
}

/** Weight source: given a layer name, shape and fan-in, produce the tensor. */
export interface WeightInit {
  conv(name: string, kh: number, kw: number, cin: number, cout: number): { weights: Float32Array; bias: Float32Array };
  dense(name: string, cin: number, cout: number): { weights: Float32Array; bias: Float32Array };
}

function outSize(size: number, k: number, stride: number, pad: Padding): number {
  if (pad === "same") return Math.ceil(size / stride);
  return Math.floor((size - k) / stride) + 1;
}

/** Incrementally assembles a graph while tracking value shapes. */
export class GraphBuilder {
  private ops: Op[] = [];
  private spatial = new Map<string, SpatialShape>();
  private flat = new Map<string, number>();
  private counter = 0;

  constructor(
    public readonly inputName: string,
    public readonly inputShape: SpatialShape,
    private init: WeightInit,
  ) {
    this.spatial.set(inputName, inputShape);
  }

  private fresh(prefix: string): string {
    this.counter += 1;
    return `${prefix}_${this.counter}`;
  }

  shapeOf(name: string): SpatialShape {
    const shape = this.spatial.get(name);
    if (!shape) throw new Error(`no spatial shape recorded for ${name}`);
    return shape;
  }

  conv(
    input: string,
    cout: number,
    kh: number,
    kw: number,
    opts: { stride?: number; pad?: Padding; relu?: boolean; name?: string } = {},
  ): string {
    const { stride = 1, pad = "same", relu = true } = opts;
    const inShape = this.shapeOf(input);
    const name = opts.name ?? this.fresh("conv");
    const { weights, bias } = this.init.conv(name, kh, kw, inShape.c, cout);
    if (weights.length !== kh * kw * inShape.c * cout) {
      throw new Error(
        `${name}: weight tensor has ${weights.length} values, expected ${kh * kw * inShape.c * cout}`,
      );
    }
    if (bias.length !== cout) throw new Error(`${name}: bias length ${bias.length} != ${cout}`);
    const output = this.fresh(`${name}_out`);
    this.ops.push({
      kind: "conv", name, input, output, kh, kw, stride, pad,
      cin: inShape.c, cout, weights, bias, relu,
    });
    this.spatial.set(output, {
      h: outSize(inShape.h, kh, stride, pad),
      w: outSize(inShape.w, kw, stride, pad),
      c: cout,
    });
    return output;
  }

  pool(kind: "maxpool" | "avgpool", input: string, k: number, stride: number, pad: Padding): string {
    const inShape = this.shapeOf(input);
    const name = this.fresh(kind);
    const output = this.fresh(`${name}_out`);
    this.ops.push({ kind, name, input, output, k, stride, pad });
    this.spatial.set(output, {
      h: outSize(inShape.h, k, stride, pad),
      w: outSize(inShape.w, k, stride, pad),
      c: inShape.c,
    });
    return output;
  }

  concat(inputs: string[]): string {
    const shapes = inputs.map((i) => this.shapeOf(i));
    const [first] = shapes;
    for (const s of shapes) {
      if (s.h !== first.h || s.w !== first.w) {
        throw new Error(`concat inputs disagree spatially: ${JSON.stringify(shapes)}`);
      }
    }
    const name = this.fresh("concat");
    const output = this.fresh(`${name}_out`);
    this.ops.push({ kind: "concat", name, inputs, output });
    this.spatial.set(output, {
      h: first.h,
      w: first.w,
      c: shapes.reduce((acc, s) => acc + s.c, 0),
    });
    return output;
  }

  globalAveragePool(input: string): string {
    const inShape = this.shapeOf(input);
    const name = this.fresh("gap");
    const output = this.fresh(`${name}_out`);
    this.ops.push({ kind: "gap", name, input, output });
    this.flat.set(output, inShape.c);
    return output;
  }

  dense(input: string, cout: number, name = "head"): string {
    const cin = this.flat.get(input);
    if (cin === undefined) throw new Error(`dense input ${input} is not a flat vector`);
    const { weights, bias } = this.init.dense(name, cin, cout);
    if (weights.length !== cin * cout) {
      throw new Error(`${name}: weight tensor has ${weights.length} values, expected ${cin * cout}`);
    }
    const output = this.fresh(`${name}_out`);
    this.ops.push({ kind: "dense", name, input, output, cin, cout, weights, bias });
    this.flat.set(output, cout);
    return output;
  }

  softmax(input: string): string {
    const cin = this.flat.get(input);
    if (cin === undefined) throw new Error(`softmax input ${input} is not a flat vector`);
    const name = this.fresh("softmax");
    const output = this.fresh(`${name}_out`);
    this.ops.push({ kind: "softmax", name, input, output });
    this.flat.set(output, cin);
    return output;
  }

  finish(outputName: string): Graph {
    return {
      inputName: this.inputName,
      inputShape: this.inputShape,
      outputName,
      ops: this.ops,
    };
  }
}

export function parameterCount(graph: Graph): number {
  let count = 0;
  for (const op of graph.ops) {
    if (op.kind === "conv" || op.kind === "dense") {
      count += op.weights.length + op.bias.length;
    }
  }
  return count;
}

export function outputDimension(graph: Graph): number {
  for (let i = graph.ops.length - 1; i >= 0; i--) {
    const op = graph.ops[i];
    if (op.kind === "dense") return op.cout;
  }
  throw new Error("graph has no dense head");
}

export function endsWithSoftmax(graph: Graph): boolean {
  const last = graph.ops[graph.ops.length - 1];
  return last !== undefined && last.kind === "softmax";
}

/** Append a softmax over the current output (used when a head lacks one). */
export function appendSoftmax(graph: Graph): Graph {
  const name = "appended_softmax";
  const output = `${name}_out`;
  return {
    ...graph,
    ops: [...graph.ops, { kind: "softmax", name, input: graph.outputName, output }],
    outputName: output,
  };
}
