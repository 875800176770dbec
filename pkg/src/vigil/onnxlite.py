"""Minimal ONNX model reader and numpy executor.

No ONNX runtime is available in this environment, so the model backend ships
its own reader for the protobuf wire format plus an executor for the op
subset exported classifier graphs actually use: Transpose, Conv, Relu,
MaxPool, AveragePool, GlobalAveragePool, Concat, Flatten, Gemm, Softmax.
Anything outside that subset fails loudly at load or run time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class OnnxDecodeError(Exception):
    """The file is not a decodable ONNX model (or uses unsupported features)."""


class OnnxExecutionError(Exception):
    """The graph references an op or attribute the executor does not support."""


# --------------------------------------------------------------------------
# Protobuf wire-format primitives
# --------------------------------------------------------------------------

_WIRE_VARINT = 0
_WIRE_I64 = 1
_WIRE_LEN = 2
_WIRE_I32 = 5


def _read_varint(buf: bytes, pos: int) -> tuple[int, int]:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise OnnxDecodeError("truncated varint")
        byte = buf[pos]
        pos += 1
        result |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise OnnxDecodeError("varint too long")


def _to_int64(value: int) -> int:
    return value - (1 << 64) if value >= (1 << 63) else value


def _iter_fields(buf: bytes):
    """Yield (field_number, wire_type, value) where value is an int for
    varint/fixed fields and a bytes slice for length-delimited fields."""
    pos = 0
    while pos < len(buf):
        tag, pos = _read_varint(buf, pos)
        number, wire = tag >> 3, tag & 0x7
        if wire == _WIRE_VARINT:
            value, pos = _read_varint(buf, pos)
            yield number, wire, value
        elif wire == _WIRE_LEN:
            length, pos = _read_varint(buf, pos)
            if pos + length > len(buf):
                raise OnnxDecodeError("truncated length-delimited field")
            yield number, wire, buf[pos : pos + length]
            pos += length
        elif wire == _WIRE_I32:
            if pos + 4 > len(buf):
                raise OnnxDecodeError("truncated fixed32 field")
            yield number, wire, int.from_bytes(buf[pos : pos + 4], "little")
            pos += 4
        elif wire == _WIRE_I64:
            if pos + 8 > len(buf):
                raise OnnxDecodeError("truncated fixed64 field")
            yield number, wire, int.from_bytes(buf[pos : pos + 8], "little")
            pos += 8
        else:
            raise OnnxDecodeError(f"unsupported wire type {wire}")


def _packed_varints(data: bytes) -> list[int]:
    out = []
    pos = 0
    while pos < len(data):
        value, pos = _read_varint(data, pos)
        out.append(_to_int64(value))
    return out


# --------------------------------------------------------------------------
# ONNX message subset
# --------------------------------------------------------------------------

_TENSOR_FLOAT = 1
_TENSOR_INT64 = 7

_ATTR_FLOAT = 1
_ATTR_INT = 2
_ATTR_STRING = 3
_ATTR_FLOATS = 6
_ATTR_INTS = 7


@dataclass
class OnnxNode:
    op_type: str
    name: str
    inputs: list[str]
    outputs: list[str]
    attrs: dict[str, object]


@dataclass
class OnnxModel:
    nodes: list[OnnxNode]
    initializers: dict[str, np.ndarray]
    graph_inputs: list[tuple[str, list[int | None]]]
    graph_outputs: list[str]
    metadata: dict[str, str]
    opset_version: int = 0
    graph_name: str = ""

    @property
    def input_name(self) -> str:
        feeds = [name for name, _ in self.graph_inputs if name not in self.initializers]
        if len(feeds) != 1:
            raise OnnxExecutionError(f"expected exactly one graph input, found {feeds}")
        return feeds[0]

    def input_shape(self) -> list[int | None]:
        target = self.input_name
        for name, shape in self.graph_inputs:
            if name == target:
                return shape
        return []

    def run(self, input_array: np.ndarray) -> np.ndarray:
        values: dict[str, np.ndarray] = dict(self.initializers)
        values[self.input_name] = np.asarray(input_array, dtype=np.float32)
        for node in self.nodes:
            op = _OPS.get(node.op_type)
            if op is None:
                raise OnnxExecutionError(f"unsupported op {node.op_type} (node {node.name!r})")
            args = []
            for name in node.inputs:
                if name not in values:
                    raise OnnxExecutionError(f"node {node.name!r} input {name!r} not computed yet")
                args.append(values[name])
            results = op(node, *args)
            if not isinstance(results, tuple):
                results = (results,)
            for out_name, result in zip(node.outputs, results):
                values[out_name] = result
        missing = [name for name in self.graph_outputs if name not in values]
        if missing:
            raise OnnxExecutionError(f"graph outputs never produced: {missing}")
        return values[self.graph_outputs[0]]


def _decode_string(value: bytes) -> str:
    return value.decode("utf-8")


def _parse_tensor(buf: bytes) -> tuple[str, np.ndarray]:
    dims: list[int] = []
    data_type = 0
    name = ""
    raw: bytes | None = None
    float_data: list[float] = []
    int64_data: list[int] = []
    for number, wire, value in _iter_fields(buf):
        if number == 1:  # dims
            if wire == _WIRE_VARINT:
                dims.append(_to_int64(value))
            else:
                dims.extend(_packed_varints(value))
        elif number == 2 and wire == _WIRE_VARINT:
            data_type = value
        elif number == 4:  # float_data
            if wire == _WIRE_LEN:
                float_data.extend(np.frombuffer(value, dtype="<f4").tolist())
            else:
                float_data.append(np.frombuffer(value.to_bytes(4, "little"), dtype="<f4")[0])
        elif number == 7:  # int64_data
            if wire == _WIRE_LEN:
                int64_data.extend(_packed_varints(value))
            else:
                int64_data.append(_to_int64(value))
        elif number == 8 and wire == _WIRE_LEN:
            name = _decode_string(value)
        elif number == 9 and wire == _WIRE_LEN:
            raw = bytes(value)
    if data_type == _TENSOR_FLOAT:
        if raw is not None:
            arr = np.frombuffer(raw, dtype="<f4")
        else:
            arr = np.asarray(float_data, dtype=np.float32)
    elif data_type == _TENSOR_INT64:
        if raw is not None:
            arr = np.frombuffer(raw, dtype="<i8")
        else:
            arr = np.asarray(int64_data, dtype=np.int64)
    else:
        raise OnnxDecodeError(f"initializer {name!r} has unsupported data type {data_type}")
    expected = int(np.prod(dims)) if dims else arr.size
    if arr.size != expected:
        raise OnnxDecodeError(f"initializer {name!r} has {arr.size} values for dims {dims}")
    return name, arr.reshape(dims).copy()


def _parse_attribute(buf: bytes) -> tuple[str, object]:
    name = ""
    attr_type = 0
    f_val = 0.0
    i_val = 0
    s_val = b""
    floats: list[float] = []
    ints: list[int] = []
    for number, wire, value in _iter_fields(buf):
        if number == 1 and wire == _WIRE_LEN:
            name = _decode_string(value)
        elif number == 2 and wire == _WIRE_I32:
            f_val = float(np.frombuffer(value.to_bytes(4, "little"), dtype="<f4")[0])
        elif number == 3 and wire == _WIRE_VARINT:
            i_val = _to_int64(value)
        elif number == 4 and wire == _WIRE_LEN:
            s_val = bytes(value)
        elif number == 7:  # floats
            if wire == _WIRE_LEN:
                floats.extend(np.frombuffer(value, dtype="<f4").tolist())
            else:
                floats.append(float(np.frombuffer(value.to_bytes(4, "little"), dtype="<f4")[0]))
        elif number == 8:  # ints
            if wire == _WIRE_LEN:
                ints.extend(_packed_varints(value))
            else:
                ints.append(_to_int64(value))
        elif number == 20 and wire == _WIRE_VARINT:
            attr_type = value
    if attr_type == _ATTR_FLOAT:
        return name, f_val
    if attr_type == _ATTR_INT:
        return name, i_val
    if attr_type == _ATTR_STRING:
        return name, _decode_string(s_val)
    if attr_type == _ATTR_FLOATS:
        return name, floats
    if attr_type == _ATTR_INTS:
        return name, ints
    raise OnnxDecodeError(f"attribute {name!r} has unsupported type {attr_type}")


def _parse_node(buf: bytes) -> OnnxNode:
    inputs: list[str] = []
    outputs: list[str] = []
    name = ""
    op_type = ""
    attrs: dict[str, object] = {}
    for number, wire, value in _iter_fields(buf):
        if number == 1 and wire == _WIRE_LEN:
            inputs.append(_decode_string(value))
        elif number == 2 and wire == _WIRE_LEN:
            outputs.append(_decode_string(value))
        elif number == 3 and wire == _WIRE_LEN:
            name = _decode_string(value)
        elif number == 4 and wire == _WIRE_LEN:
            op_type = _decode_string(value)
        elif number == 5 and wire == _WIRE_LEN:
            attr_name, attr_value = _parse_attribute(value)
            attrs[attr_name] = attr_value
    return OnnxNode(op_type=op_type, name=name, inputs=inputs, outputs=outputs, attrs=attrs)


def _parse_value_info(buf: bytes) -> tuple[str, list[int | None]]:
    name = ""
    shape: list[int | None] = []
    for number, wire, value in _iter_fields(buf):
        if number == 1 and wire == _WIRE_LEN:
            name = _decode_string(value)
        elif number == 2 and wire == _WIRE_LEN:  # TypeProto
            for t_num, t_wire, t_val in _iter_fields(value):
                if t_num == 1 and t_wire == _WIRE_LEN:  # tensor_type
                    for tt_num, tt_wire, tt_val in _iter_fields(t_val):
                        if tt_num == 2 and tt_wire == _WIRE_LEN:  # shape
                            for d_num, d_wire, d_val in _iter_fields(tt_val):
                                if d_num == 1 and d_wire == _WIRE_LEN:  # dim
                                    dim_value: int | None = None
                                    for dd_num, dd_wire, dd_val in _iter_fields(d_val):
                                        if dd_num == 1 and dd_wire == _WIRE_VARINT:
                                            dim_value = _to_int64(dd_val)
                                    shape.append(dim_value)
    return name, shape


def _parse_graph(buf: bytes, model: OnnxModel) -> None:
    for number, wire, value in _iter_fields(buf):
        if number == 1 and wire == _WIRE_LEN:
            model.nodes.append(_parse_node(value))
        elif number == 2 and wire == _WIRE_LEN:
            model.graph_name = _decode_string(value)
        elif number == 5 and wire == _WIRE_LEN:
            name, tensor = _parse_tensor(value)
            model.initializers[name] = tensor
        elif number == 11 and wire == _WIRE_LEN:
            model.graph_inputs.append(_parse_value_info(value))
        elif number == 12 and wire == _WIRE_LEN:
            out_name, _ = _parse_value_info(value)
            model.graph_outputs.append(out_name)


def decode_model(data: bytes) -> OnnxModel:
    model = OnnxModel(nodes=[], initializers={}, graph_inputs=[], graph_outputs=[], metadata={})
    saw_graph = False
    for number, wire, value in _iter_fields(data):
        if number == 7 and wire == _WIRE_LEN:  # graph
            _parse_graph(value, model)
            saw_graph = True
        elif number == 8 and wire == _WIRE_LEN:  # opset_import
            for o_num, o_wire, o_val in _iter_fields(value):
                if o_num == 2 and o_wire == _WIRE_VARINT:
                    model.opset_version = max(model.opset_version, _to_int64(o_val))
        elif number == 14 and wire == _WIRE_LEN:  # metadata_props
            key = ""
            val = ""
            for m_num, m_wire, m_val in _iter_fields(value):
                if m_num == 1 and m_wire == _WIRE_LEN:
                    key = _decode_string(m_val)
                elif m_num == 2 and m_wire == _WIRE_LEN:
                    val = _decode_string(m_val)
            if key:
                model.metadata[key] = val
    if not saw_graph or not model.graph_outputs:
        raise OnnxDecodeError("no graph found in model file")
    return model


def load_model(path: str | Path) -> OnnxModel:
    data = Path(path).read_bytes()
    try:
        return decode_model(data)
    except OnnxDecodeError:
        raise
    except Exception as exc:
        raise OnnxDecodeError(str(exc)) from exc


# --------------------------------------------------------------------------
# Executor ops (NCHW, float32)
# --------------------------------------------------------------------------

def _attr_ints(node: OnnxNode, name: str, default: list[int]) -> list[int]:
    value = node.attrs.get(name, default)
    return [int(v) for v in value]


def _pool_output_dims(h: int, w: int, kh: int, kw: int, sh: int, sw: int, pads: list[int]) -> tuple[int, int]:
    out_h = (h + pads[0] + pads[2] - kh) // sh + 1
    out_w = (w + pads[1] + pads[3] - kw) // sw + 1
    return out_h, out_w


def _op_transpose(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    perm = _attr_ints(node, "perm", list(range(x.ndim))[::-1])
    return np.transpose(x, perm)


def _op_relu(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    return np.maximum(x, np.float32(0.0))


def _op_concat(node: OnnxNode, *arrays: np.ndarray) -> np.ndarray:
    axis = int(node.attrs.get("axis", 1))
    return np.concatenate(arrays, axis=axis)


def _op_flatten(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    axis = int(node.attrs.get("axis", 1))
    lead = int(np.prod(x.shape[:axis])) if axis > 0 else 1
    return x.reshape(lead, -1)


def _op_softmax(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    axis = int(node.attrs.get("axis", -1))
    shifted = np.exp(x - x.max(axis=axis, keepdims=True))
    return (shifted / shifted.sum(axis=axis, keepdims=True)).astype(np.float32)


def _op_gemm(node: OnnxNode, a: np.ndarray, b: np.ndarray, c: np.ndarray | None = None) -> np.ndarray:
    alpha = np.float32(node.attrs.get("alpha", 1.0))
    beta = np.float32(node.attrs.get("beta", 1.0))
    if int(node.attrs.get("transA", 0)):
        a = a.T
    if int(node.attrs.get("transB", 0)):
        b = b.T
    out = alpha * (a @ b)
    if c is not None:
        out = out + beta * c
    return out.astype(np.float32)


def _op_global_average_pool(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    return x.mean(axis=(2, 3), keepdims=True).astype(np.float32)


def _im2col(x: np.ndarray, kh: int, kw: int, sh: int, sw: int, pads: list[int]) -> tuple[np.ndarray, int, int]:
    n, c, h, w = x.shape
    out_h, out_w = _pool_output_dims(h, w, kh, kw, sh, sw, pads)
    padded = np.pad(x, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])))
    cols = np.empty((n, c * kh * kw, out_h * out_w), dtype=np.float32)
    idx = 0
    for ky in range(kh):
        for kx in range(kw):
            patch = padded[:, :, ky : ky + out_h * sh : sh, kx : kx + out_w * sw : sw]
            cols[:, idx * c : (idx + 1) * c, :] = patch.reshape(n, c, -1)
            idx += 1
    return cols, out_h, out_w


def _op_conv(node: OnnxNode, x: np.ndarray, w: np.ndarray, b: np.ndarray | None = None) -> np.ndarray:
    if int(node.attrs.get("group", 1)) != 1:
        raise OnnxExecutionError("grouped convolution is not supported")
    dilations = _attr_ints(node, "dilations", [1, 1])
    if dilations != [1, 1]:
        raise OnnxExecutionError("dilated convolution is not supported")
    if "auto_pad" in node.attrs and node.attrs["auto_pad"] not in ("", "NOTSET"):
        raise OnnxExecutionError("auto_pad is not supported; use explicit pads")
    kh, kw = int(w.shape[2]), int(w.shape[3])
    sh, sw = _attr_ints(node, "strides", [1, 1])
    pads = _attr_ints(node, "pads", [0, 0, 0, 0])
    cols, out_h, out_w = _im2col(x, kh, kw, sh, sw, pads)
    m = w.shape[0]
    # weight layout is (M, C, KH, KW); im2col stacks (ky, kx) outermost, C innermost
    w_mat = np.transpose(w, (2, 3, 1, 0)).reshape(kh * kw * x.shape[1], m).astype(np.float32)
    out = np.matmul(w_mat.T[np.newaxis, :, :], cols)
    if b is not None:
        out = out + b.reshape(1, m, 1).astype(np.float32)
    return out.reshape(x.shape[0], m, out_h, out_w).astype(np.float32)


def _op_maxpool(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    kh, kw = _attr_ints(node, "kernel_shape", [1, 1])
    sh, sw = _attr_ints(node, "strides", [1, 1])
    pads = _attr_ints(node, "pads", [0, 0, 0, 0])
    n, c, h, w = x.shape
    out_h, out_w = _pool_output_dims(h, w, kh, kw, sh, sw, pads)
    padded = np.pad(x, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])), constant_values=-np.inf)
    out = np.full((n, c, out_h, out_w), -np.inf, dtype=np.float32)
    for ky in range(kh):
        for kx in range(kw):
            patch = padded[:, :, ky : ky + out_h * sh : sh, kx : kx + out_w * sw : sw]
            np.maximum(out, patch, out=out)
    return out


def _op_averagepool(node: OnnxNode, x: np.ndarray) -> np.ndarray:
    include_pad = bool(int(node.attrs.get("count_include_pad", 0)))
    kh, kw = _attr_ints(node, "kernel_shape", [1, 1])
    sh, sw = _attr_ints(node, "strides", [1, 1])
    pads = _attr_ints(node, "pads", [0, 0, 0, 0])
    n, c, h, w = x.shape
    out_h, out_w = _pool_output_dims(h, w, kh, kw, sh, sw, pads)
    padded = np.pad(x, ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])))
    ones = np.pad(np.ones((1, 1, h, w), dtype=np.float32), ((0, 0), (0, 0), (pads[0], pads[2]), (pads[1], pads[3])))
    total = np.zeros((n, c, out_h, out_w), dtype=np.float32)
    count = np.zeros((1, 1, out_h, out_w), dtype=np.float32)
    for ky in range(kh):
        for kx in range(kw):
            total += padded[:, :, ky : ky + out_h * sh : sh, kx : kx + out_w * sw : sw]
            count += ones[:, :, ky : ky + out_h * sh : sh, kx : kx + out_w * sw : sw]
    if include_pad:
        return (total / np.float32(kh * kw)).astype(np.float32)
    return (total / count).astype(np.float32)


_OPS = {
    "Transpose": _op_transpose,
    "Conv": _op_conv,
    "Relu": _op_relu,
    "MaxPool": _op_maxpool,
    "AveragePool": _op_averagepool,
    "GlobalAveragePool": _op_global_average_pool,
    "Concat": _op_concat,
    "Flatten": _op_flatten,
    "Gemm": _op_gemm,
    "Softmax": _op_softmax,
}
