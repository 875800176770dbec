"""Minimal ONNX protobuf encoder used only by the tests.

Encoding lives here, decoding in the package; the two sides are written
independently so round-trips are a genuine check of the wire format.
"""

from __future__ import annotations

import struct

import numpy as np

FLOAT = 1
INT64 = 7

_ATTR_FLOAT = 1
_ATTR_INT = 2
_ATTR_STRING = 3
_ATTR_INTS = 7


def varint(value: int) -> bytes:
    if value < 0:
        value += 1 << 64
    out = bytearray()
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return bytes(out)


def tag(field: int, wire: int) -> bytes:
    return varint((field << 3) | wire)


def len_field(field: int, payload: bytes) -> bytes:
    return tag(field, 2) + varint(len(payload)) + payload


def varint_field(field: int, value: int) -> bytes:
    return tag(field, 0) + varint(value)


def string_field(field: int, text: str) -> bytes:
    return len_field(field, text.encode("utf-8"))


def tensor(name: str, array: np.ndarray) -> bytes:
    arr = np.asarray(array)
    if arr.dtype == np.float32:
        dtype = FLOAT
        raw = arr.astype("<f4").tobytes()
    elif arr.dtype == np.int64:
        dtype = INT64
        raw = arr.astype("<i8").tobytes()
    else:
        raise ValueError(f"unsupported dtype {arr.dtype}")
    out = b"".join(varint_field(1, d) for d in arr.shape)
    out += varint_field(2, dtype)
    out += string_field(8, name)
    out += len_field(9, raw)
    return out


def attr_int(name: str, value: int) -> bytes:
    return string_field(1, name) + varint_field(3, value) + varint_field(20, _ATTR_INT)


def attr_float(name: str, value: float) -> bytes:
    return string_field(1, name) + tag(2, 5) + struct.pack("<f", value) + varint_field(20, _ATTR_FLOAT)


def attr_string(name: str, value: str) -> bytes:
    return string_field(1, name) + len_field(4, value.encode()) + varint_field(20, _ATTR_STRING)


def attr_ints(name: str, values: list[int]) -> bytes:
    packed = b"".join(varint(v) for v in values)
    return string_field(1, name) + len_field(8, packed) + varint_field(20, _ATTR_INTS)


def node(op_type: str, inputs: list[str], outputs: list[str], name: str = "", attrs: list[bytes] = ()) -> bytes:
    out = b"".join(string_field(1, i) for i in inputs)
    out += b"".join(string_field(2, o) for o in outputs)
    out += string_field(3, name or op_type.lower())
    out += string_field(4, op_type)
    out += b"".join(len_field(5, attr) for attr in attrs)
    return out


def value_info(name: str, dims: list[int]) -> bytes:
    shape = b"".join(len_field(1, varint_field(1, d)) for d in dims)
    tensor_type = varint_field(1, FLOAT) + len_field(2, shape)
    type_proto = len_field(1, tensor_type)
    return string_field(1, name) + len_field(2, type_proto)


def graph(
    nodes: list[bytes],
    initializers: list[bytes],
    inputs: list[bytes],
    outputs: list[bytes],
    name: str = "g",
) -> bytes:
    out = b"".join(len_field(1, n) for n in nodes)
    out += string_field(2, name)
    out += b"".join(len_field(5, t) for t in initializers)
    out += b"".join(len_field(11, vi) for vi in inputs)
    out += b"".join(len_field(12, vo) for vo in outputs)
    return out


def model(graph_bytes: bytes, metadata: dict[str, str] | None = None, opset: int = 13) -> bytes:
    out = varint_field(1, 8)  # ir_version
    out += string_field(2, "vigil-tests")
    out += len_field(7, graph_bytes)
    out += len_field(8, string_field(1, "") + varint_field(2, opset))
    for key, value in (metadata or {}).items():
        out += len_field(14, string_field(1, key) + string_field(2, value))
    return out


def tiny_classifier_model(
    class_order: list[str],
    weights: np.ndarray,
    bias: np.ndarray,
    metadata_extra: dict[str, str] | None = None,
) -> bytes:
    """Input 1x299x299x3 -> Transpose -> GlobalAveragePool -> Flatten ->
    Gemm(3 -> 4) -> Softmax, the same layout contract as a real export."""
    import json

    nodes = [
        node("Transpose", ["input"], ["nchw"], attrs=[attr_ints("perm", [0, 3, 1, 2])]),
        node("GlobalAveragePool", ["nchw"], ["pooled"]),
        node("Flatten", ["pooled"], ["flat"], attrs=[attr_int("axis", 1)]),
        node("Gemm", ["flat", "w", "b"], ["logits"]),
        node("Softmax", ["logits"], ["probs"], attrs=[attr_int("axis", -1)]),
    ]
    initializers = [
        tensor("w", weights.astype(np.float32)),
        tensor("b", bias.astype(np.float32)),
    ]
    metadata = {"class_order": json.dumps(class_order)}
    metadata.update(metadata_extra or {})
    return model(
        graph(
            nodes,
            initializers,
            [value_info("input", [1, 299, 299, 3])],
            [value_info("probs", [1, 4])],
        ),
        metadata=metadata,
    )
