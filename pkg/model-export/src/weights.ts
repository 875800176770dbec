/**
 * Weights bundle: a single binary file holding named float32 tensors.
 *
 * Layout: 4-byte magic "VWB1", uint32 LE header length, UTF-8 JSON header
 * (list of {name, shape}), then each tensor's raw little-endian float32 data
 * concatenated in header order. Convolution weights are stored folded
 * (weight [kh, kw, cin, cout] plus bias [cout]); layer names match the
 * architecture's layer names with `.weight` / `.bias` suffixes.
 */

import * as fs from "node:fs";

const MAGIC = Buffer.from("VWB1", "ascii");

export interface BundleEntry {
  shape: number[];
  data: Float32Array;
}

export interface WeightBundle {
  entries: Map<string, BundleEntry>;
}

export function saveBundle(path: string, tensors: Map<string, BundleEntry>): void {
  const header = JSON.stringify(
    Array.from(tensors.entries()).map(([name, entry]) => ({ name, shape: entry.shape })),
  );
  const headerBytes = Buffer.from(header, "utf-8");
  const chunks: Buffer[] = [MAGIC, Buffer.alloc(4)];
  chunks[1].writeUInt32LE(headerBytes.length, 0);
  chunks.push(headerBytes);
  for (const [, entry] of tensors) {
    chunks.push(Buffer.from(entry.data.buffer, entry.data.byteOffset, entry.data.byteLength));
  }
  fs.writeFileSync(path, Buffer.concat(chunks));
}

export function loadBundle(path: string): WeightBundle {
  const raw = fs.readFileSync(path);
  if (raw.length < 8 || !raw.subarray(0, 4).equals(MAGIC)) {
    throw new Error(`${path} is not a weights bundle (bad magic)`);
  }
  const headerLength = raw.readUInt32LE(4);
  const headerEnd = 8 + headerLength;
  if (raw.length < headerEnd) throw new Error(`${path}: truncated header`);
  const header: { name: string; shape: number[] }[] = JSON.parse(
    raw.subarray(8, headerEnd).toString("utf-8"),
  );
  const entries = new Map<string, BundleEntry>();
  let offset = headerEnd;
  for (const { name, shape } of header) {
    const count = shape.reduce((a, b) => a * b, 1);
    const end = offset + count * 4;
    if (raw.length < end) throw new Error(`${path}: truncated tensor ${name}`);
    // copy via slice so the view is aligned and detached from the file buffer
    const data = new Float32Array(
      raw.buffer.slice(raw.byteOffset + offset, raw.byteOffset + end),
    );
    entries.set(name, { shape, data });
    offset = end;
  }
  if (offset !== raw.length) throw new Error(`${path}: ${raw.length - offset} trailing bytes`);
  return { entries };
}

/** Collect every parameter tensor of a built graph into bundle form. */
export function bundleFromGraph(graph: import("./graph").Graph): Map<string, BundleEntry> {
  const tensors = new Map<string, BundleEntry>();
  for (const op of graph.ops) {
    if (op.kind === "conv") {
      tensors.set(`${op.name}.weight`, { shape: [op.kh, op.kw, op.cin, op.cout], data: op.weights });
      tensors.set(`${op.name}.bias`, { shape: [op.cout], data: op.bias });
    } else if (op.kind === "dense") {
      tensors.set(`${op.name}.weight`, { shape: [op.cin, op.cout], data: op.weights });
      tensors.set(`${op.name}.bias`, { shape: [op.cout], data: op.bias });
    }
  }
  return tensors;
}
