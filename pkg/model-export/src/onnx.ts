/**
 * Serializes the graph IR to an ONNX model file via protobufjs.
 *
 * The wire graph is channels-first, so serialization inserts one Transpose
 * after the NHWC graph input and permutes conv weights to [cout, cin, kh, kw].
 * Channel order is preserved through GlobalAveragePool + Flatten, so dense
 * weights pass through unchanged.
 */

import protobuf from "protobufjs";

import { ConvOp, DenseOp, Graph, Padding, PoolOp } from "./graph";

const ONNX_PROTO = `
syntax = "proto3";
package onnx;

message AttributeProto {
  enum AttributeType {
    UNDEFINED = 0; FLOAT = 1; INT = 2; STRING = 3; TENSOR = 4; GRAPH = 5;
    FLOATS = 6; INTS = 7; STRINGS = 8; TENSORS = 9; GRAPHS = 10;
  }
  string name = 1;
  float f = 2;
  int64 i = 3;
  bytes s = 4;
  repeated float floats = 7;
  repeated int64 ints = 8;
  AttributeType type = 20;
}

message ValueInfoProto {
  string name = 1;
  TypeProto type = 2;
}

message NodeProto {
  repeated string input = 1;
  repeated string output = 2;
  string name = 3;
  string op_type = 4;
  repeated AttributeProto attribute = 5;
  string domain = 7;
}

message ModelProto {
  int64 ir_version = 1;
  string producer_name = 2;
  string producer_version = 3;
  string domain = 4;
  int64 model_version = 5;
  string doc_string = 6;
  GraphProto graph = 7;
  repeated OperatorSetIdProto opset_import = 8;
  repeated StringStringEntryProto metadata_props = 14;
}

message StringStringEntryProto {
  string key = 1;
  string value = 2;
}

message GraphProto {
  repeated NodeProto node = 1;
  string name = 2;
  repeated TensorProto initializer = 5;
  string doc_string = 10;
  repeated ValueInfoProto input = 11;
  repeated ValueInfoProto output = 12;
  repeated ValueInfoProto value_info = 13;
}

message TensorProto {
  enum DataType {
    UNDEFINED = 0; FLOAT = 1; UINT8 = 2; INT8 = 3; UINT16 = 4; INT16 = 5;
    INT32 = 6; INT64 = 7; STRING = 8; BOOL = 9; FLOAT16 = 10; DOUBLE = 11;
  }
  repeated int64 dims = 1;
  int32 data_type = 2;
  repeated float float_data = 4;
  repeated int32 int32_data = 5;
  repeated int64 int64_data = 7;
  string name = 8;
  bytes raw_data = 9;
}

message TypeProto {
  message Tensor {
    int32 elem_type = 1;
    TensorShapeProto shape = 2;
  }
  Tensor tensor_type = 1;
}

message TensorShapeProto {
  message Dimension {
    oneof value {
      int64 dim_value = 1;
      string dim_param = 2;
    }
  }
  repeated Dimension dim = 1;
}

message OperatorSetIdProto {
  string domain = 1;
  int64 version = 2;
}
`;

const FLOAT = 1;
const OPSET_VERSION = 13;

const root = protobuf.parse(ONNX_PROTO, { keepCase: true }).root;
const ModelProto = root.lookupType("onnx.ModelProto");

interface NodeSpec {
  op_type: string;
  input: string[];
  output: string[];
  name: string;
  attribute?: object[];
}

function attrInt(name: string, value: number): object {
  return { name, i: value, type: 2 };
}

function attrInts(name: string, values: number[]): object {
  return { name, ints: values, type: 7 };
}

function floatTensor(name: string, dims: number[], data: Float32Array): object {
  return {
    name,
    dims,
    data_type: FLOAT,
    raw_data: new Uint8Array(data.buffer, data.byteOffset, data.byteLength),
  };
}

function valueInfo(name: string, dims: number[]): object {
  return {
    name,
    type: { tensor_type: { elem_type: FLOAT, shape: { dim: dims.map((d) => ({ dim_value: d })) } } },
  };
}

function convPads(kh: number, kw: number, stride: number, pad: Padding): number[] {
  if (pad === "valid") return [0, 0, 0, 0];
  if (stride !== 1 || kh % 2 === 0 || kw % 2 === 0) {
    throw new Error("same padding is only supported for stride-1 odd kernels");
  }
  const ph = (kh - 1) / 2;
  const pw = (kw - 1) / 2;
  return [ph, pw, ph, pw];
}

/** [kh, kw, cin, cout] -> [cout, cin, kh, kw] */
export function transposeConvWeights(op: ConvOp): Float32Array {
  const { kh, kw, cin, cout, weights } = op;
  const out = new Float32Array(weights.length);
  for (let ky = 0; ky < kh; ky++) {
    for (let kx = 0; kx < kw; kx++) {
      for (let ci = 0; ci < cin; ci++) {
        const base = ((ky * kw + kx) * cin + ci) * cout;
        for (let co = 0; co < cout; co++) {
          out[((co * cin + ci) * kh + ky) * kw + kx] = weights[base + co];
        }
      }
    }
  }
  return out;
}

export interface OnnxExportOptions {
  classOrder: string[];
  docString?: string;
  metadata?: Record<string, string>;
}

export function encodeOnnxModel(graph: Graph, options: OnnxExportOptions): Uint8Array {
  const nodes: NodeSpec[] = [];
  const initializers: object[] = [];

  const nchwInput = `${graph.inputName}_nchw`;
  nodes.push({
    op_type: "Transpose",
    input: [graph.inputName],
    output: [nchwInput],
    name: "to_nchw",
    attribute: [attrInts("perm", [0, 3, 1, 2])],
  });
  const rename = new Map<string, string>([[graph.inputName, nchwInput]]);
  const resolve = (name: string) => rename.get(name) ?? name;

  for (const op of graph.ops) {
    if (op.kind === "conv") {
      const weightName = `${op.name}.weight`;
      const biasName = `${op.name}.bias`;
      initializers.push(
        floatTensor(weightName, [op.cout, op.cin, op.kh, op.kw], transposeConvWeights(op)),
        floatTensor(biasName, [op.cout], op.bias),
      );
      const convOut = op.relu ? `${op.output}_preact` : op.output;
      nodes.push({
        op_type: "Conv",
        input: [resolve(op.input), weightName, biasName],
        output: [convOut],
        name: op.name,
        attribute: [
          attrInts("kernel_shape", [op.kh, op.kw]),
          attrInts("strides", [op.stride, op.stride]),
          attrInts("pads", convPads(op.kh, op.kw, op.stride, op.pad)),
          attrInt("group", 1),
        ],
      });
      if (op.relu) {
        nodes.push({
          op_type: "Relu",
          input: [convOut],
          output: [op.output],
          name: `${op.name}_relu`,
        });
      }
    } else if (op.kind === "maxpool" || op.kind === "avgpool") {
      nodes.push(poolNode(op, resolve(op.input)));
    } else if (op.kind === "concat") {
      nodes.push({
        op_type: "Concat",
        input: op.inputs.map(resolve),
        output: [op.output],
        name: op.name,
        attribute: [attrInt("axis", 1)],
      });
    } else if (op.kind === "gap") {
      const pooled = `${op.output}_pooled`;
      nodes.push({
        op_type: "GlobalAveragePool",
        input: [resolve(op.input)],
        output: [pooled],
        name: op.name,
      });
      nodes.push({
        op_type: "Flatten",
        input: [pooled],
        output: [op.output],
        name: `${op.name}_flatten`,
        attribute: [attrInt("axis", 1)],
      });
    } else if (op.kind === "dense") {
      const weightName = `${op.name}.weight`;
      const biasName = `${op.name}.bias`;
      initializers.push(
        floatTensor(weightName, [op.cin, op.cout], (op as DenseOp).weights),
        floatTensor(biasName, [op.cout], op.bias),
      );
      nodes.push({
        op_type: "Gemm",
        input: [resolve(op.input), weightName, biasName],
        output: [op.output],
        name: op.name,
      });
    } else if (op.kind === "softmax") {
      nodes.push({
        op_type: "Softmax",
        input: [resolve(op.input)],
        output: [op.output],
        name: op.name,
        attribute: [attrInt("axis", -1)],
      });
    }
  }

  const { h, w, c } = graph.inputShape;
  const payload = {
    ir_version: 8,
    producer_name: "vigil-model-export",
    producer_version: "0.1.0",
    opset_import: [{ domain: "", version: OPSET_VERSION }],
    doc_string: options.docString ?? "",
    graph: {
      name: "classifier",
      node: nodes,
      initializer: initializers,
      input: [valueInfo(graph.inputName, [1, h, w, c])],
      output: [valueInfo(graph.outputName, [1, options.classOrder.length])],
    },
    metadata_props: [
      { key: "class_order", value: JSON.stringify(options.classOrder) },
      { key: "preprocessing", value: "scale[-1,1]" },
      ...Object.entries(options.metadata ?? {}).map(([key, value]) => ({ key, value })),
    ],
  };
  const err = ModelProto.verify(payload);
  if (err) throw new Error(`invalid model payload: ${err}`);
  return ModelProto.encode(ModelProto.fromObject(payload)).finish();
}

function poolNode(op: PoolOp, input: string): NodeSpec {
  const opType = op.kind === "maxpool" ? "MaxPool" : "AveragePool";
  const pads =
    op.pad === "valid"
      ? [0, 0, 0, 0]
      : (() => {
          if (op.stride !== 1 || op.k % 2 === 0) {
            throw new Error("same padding is only supported for stride-1 odd pools");
          }
          const p = (op.k - 1) / 2;
          return [p, p, p, p];
        })();
  const attribute = [
    attrInts("kernel_shape", [op.k, op.k]),
    attrInts("strides", [op.stride, op.stride]),
    attrInts("pads", pads),
  ];
  if (op.kind === "avgpool") {
    // the reference evaluator's average excludes padded cells
    attribute.push(attrInt("count_include_pad", 0));
  }
  return { op_type: opType, input: [input], output: [op.output], name: op.name, attribute };
}

/** Decode just the metadata_props of a serialized model (round-trip checks). */
export function decodeMetadata(data: Uint8Array): Record<string, string> {
  const decoded = ModelProto.toObject(ModelProto.decode(data), { defaults: false }) as {
    metadata_props?: { key: string; value: string }[];
  };
  const out: Record<string, string> = {};
  for (const { key, value } of decoded.metadata_props ?? []) out[key] = value;
  return out;
}
