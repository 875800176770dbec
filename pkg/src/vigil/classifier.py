"""The pluggable 4-class classification backend abstraction.

Backends receive the normalized 299x299x3 tensor and return 4 probabilities.
``classify`` owns preprocessing, the distribution contract, and the
invocation counter; backends stay dumb. ConstantBackend and ScriptedBackend
are the deterministic test doubles; OnnxBackend runs an exported model file.
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import BackendContractError, BackendError, InputError
from .raster import HARD_MIN_SIDE, MODEL_INPUT_SIDE, Raster, normalize_for_model, resize_bilinear

logger = logging.getLogger(__name__)

# Distributions whose sum is off by more than this are a contract violation.
SUM_REJECT_TOLERANCE = 1e-4
# Sums within this of 1 are accepted untouched; between the two bounds we
# renormalize and warn (real float32 softmax heads drift at the 1e-6 level).
SUM_ACCEPT_TOLERANCE = 1e-6
ENTRY_REJECT_TOLERANCE = -1e-9


class Label(IntEnum):
    NORMAL = 0
    SMOKING = 1
    CALLING = 2
    SMOKING_CALLING = 3

    @property
    def wire_name(self) -> str:
        return self.name.lower()

    @classmethod
    def from_wire(cls, name: str) -> "Label":
        try:
            return cls[name.upper()]
        except KeyError:
            raise InputError(f"unknown label {name!r}") from None


CLASS_ORDER: tuple[str, ...] = tuple(label.wire_name for label in Label)


def argmax_label(probs: Sequence[float]) -> Label:
    """Highest-probability label; the lowest index wins ties."""
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return Label(best)


@dataclass(frozen=True)
class ClassificationResult:
    label: Label
    confidence: float
    probs: tuple[float, float, float, float]

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "ClassificationResult":
        validated = validate_distribution(probs)
        label = argmax_label(validated)
        return cls(label=label, confidence=validated[label], probs=validated)


def validate_distribution(probs: Sequence[float]) -> tuple[float, float, float, float]:
    """Enforce the backend output contract.

    Entries below -1e-9 or a sum off by more than 1e-4 are rejected; a sum
    between 1e-6 and 1e-4 off is renormalized with a warning; tiny negative
    noise is clamped to zero.
    """
    arr = np.asarray(probs, dtype=np.float64)
    if arr.shape != (4,):
        raise BackendContractError(f"expected 4 probabilities, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BackendContractError(f"non-finite probabilities: {arr.tolist()}")
    if np.any(arr < ENTRY_REJECT_TOLERANCE):
        raise BackendContractError(f"negative probability entries: {arr.tolist()}")
    arr = np.maximum(arr, 0.0)
    drift = abs(float(arr.sum()) - 1.0)
    if drift > SUM_REJECT_TOLERANCE:
        raise BackendContractError(f"probabilities sum to {arr.sum():.6f}, outside tolerance")
    if drift > SUM_ACCEPT_TOLERANCE:
        logger.warning("renormalizing backend distribution (sum off by %.2e)", drift)
        arr = arr / arr.sum()
    return (float(arr[0]), float(arr[1]), float(arr[2]), float(arr[3]))


class Backend:
    """A classification backend: normalized 299x299x3 tensor in, 4 probabilities out.

    ``concurrent_safe`` declares whether ``infer`` may be called from several
    threads at once. The invocation counter is maintained by ``classify``.
    """

    name = "backend"
    concurrent_safe = True

    def __init__(self) -> None:
        self._count_lock = threading.Lock()
        self.invocations = 0

    def _count(self) -> None:
        with self._count_lock:
            self.invocations += 1

    def infer(self, tensor: np.ndarray) -> Sequence[float]:
        raise NotImplementedError


class ConstantBackend(Backend):
    """Always returns the same distribution; the simplest test double."""

    name = "constant"

    def __init__(self, probs: Sequence[float]):
        super().__init__()
        if len(probs) != 4:
            raise InputError(f"constant backend needs 4 probabilities, got {len(probs)}")
        self.probs = tuple(float(p) for p in probs)

    def infer(self, tensor: np.ndarray) -> Sequence[float]:
        return self.probs


class ScriptedBackend(Backend):
    """Returns pre-scripted distributions in call order; stateful, so exclusive."""

    name = "scripted"
    concurrent_safe = False

    def __init__(self, script: Sequence[Sequence[float]]):
        super().__init__()
        self.script = [tuple(float(p) for p in row) for row in script]
        for i, row in enumerate(self.script):
            if len(row) != 4:
                raise InputError(f"scripted entry {i} has {len(row)} values, expected 4")
        self._cursor = 0

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        """Parse one whitespace-separated 4-tuple per nonblank line."""
        rows: list[tuple[float, ...]] = []
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise InputError(f"cannot read scripted backend file {path}: {exc}") from exc
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 4:
                raise InputError(f"{path}:{lineno}: expected 4 values, got {len(parts)}")
            try:
                rows.append(tuple(float(p) for p in parts))
            except ValueError as exc:
                raise InputError(f"{path}:{lineno}: {exc}") from exc
        if not rows:
            raise InputError(f"scripted backend file {path} is empty")
        return cls(rows)

    def infer(self, tensor: np.ndarray) -> Sequence[float]:
        if self._cursor >= len(self.script):
            raise BackendError(f"scripted backend exhausted after {len(self.script)} entries")
        row = self.script[self._cursor]
        self._cursor += 1
        return row


class OnnxBackend(Backend):
    """Runs an exported model file (input 1x299x299x3 float32 in [-1, 1],
    output 1x4 probabilities, required metadata key ``class_order``).

    Probabilities are remapped from the file's class order to the canonical
    label order at load time.
    """

    name = "model"

    def __init__(self, path: str | Path):
        super().__init__()
        from . import onnxlite

        try:
            self.model = onnxlite.load_model(path)
        except FileNotFoundError as exc:
            raise BackendError(f"model file not found: {path}") from exc
        except onnxlite.OnnxDecodeError as exc:
            raise BackendError(f"corrupt model file {path}: {exc}") from exc
        raw_order = self.model.metadata.get("class_order")
        if raw_order is None:
            raise BackendError(f"model file {path} is missing required class_order metadata")
        self.file_class_order = _parse_class_order(raw_order)
        self._permutation = [self.file_class_order.index(name) for name in CLASS_ORDER]

    def infer(self, tensor: np.ndarray) -> Sequence[float]:
        batch = tensor[np.newaxis, ...].astype(np.float32)
        try:
            out = self.model.run(batch)
        except Exception as exc:
            raise BackendError(f"model execution failed: {exc}") from exc
        flat = np.asarray(out, dtype=np.float64).reshape(-1)
        if flat.size != 4:
            raise BackendContractError(f"model produced {flat.size} outputs, expected 4")
        return [float(flat[i]) for i in self._permutation]


def _parse_class_order(raw: str) -> list[str]:
    """class_order metadata: JSON list or comma-separated names."""
    try:
        parsed = json.loads(raw)
    except json.JSONDecodeError:
        parsed = [part.strip() for part in raw.split(",")]
    if not isinstance(parsed, list) or sorted(parsed) != sorted(CLASS_ORDER):
        raise BackendError(f"class_order metadata {raw!r} must be a permutation of {list(CLASS_ORDER)}")
    return [str(name) for name in parsed]


def parse_backend_spec(spec: str) -> Backend:
    """Build a backend from a spec string.

    ``constant:p0,p1,p2,p3`` | ``scripted:FILE`` | ``model:FILE.onnx``
    """
    kind, sep, arg = spec.partition(":")
    if not sep:
        raise InputError(f"backend spec {spec!r} must look like kind:argument")
    if kind == "constant":
        parts = arg.split(",")
        if len(parts) != 4:
            raise InputError(f"constant backend needs 4 comma-separated values, got {len(parts)}")
        try:
            return ConstantBackend([float(p) for p in parts])
        except ValueError as exc:
            raise InputError(f"bad constant backend value: {exc}") from exc
    if kind == "scripted":
        return ScriptedBackend.from_file(arg)
    if kind == "model":
        return OnnxBackend(arg)
    raise InputError(f"unknown backend kind {kind!r}")


def classify(backend: Backend, img: Raster) -> ClassificationResult:
    """Resize to 299x299, normalize, and run the backend.

    Backend exceptions surface as BackendError, distinct from input errors.
    """
    if img.width < HARD_MIN_SIDE or img.height < HARD_MIN_SIDE:
        raise InputError(
            f"image {img.width}x{img.height} is below the {HARD_MIN_SIDE}x{HARD_MIN_SIDE} minimum"
        )
    tensor = normalize_for_model(resize_bilinear(img, MODEL_INPUT_SIDE, MODEL_INPUT_SIDE))
    backend._count()
    try:
        probs = backend.infer(tensor)
    except BackendError:
        raise
    except Exception as exc:
        raise BackendError(f"backend {backend.name} failed: {exc}") from exc
    return ClassificationResult.from_probs(probs)
