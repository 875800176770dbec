"""Self-contained numerical pieces of the training recipe.

Nothing here trains anything; these functions verify the arithmetic the
recipe relies on: softmax and smoothed-label losses, the cosine learning-rate
schedule, early stopping, epoch-step and validation-split bookkeeping, and
the separable-convolution factorization identity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import InputError

NUM_CLASSES = 4


def softmax(logits: Sequence[float] | np.ndarray) -> np.ndarray:
    """Numerically stabilized softmax (max subtraction)."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1 or z.size < 1:
        raise InputError(f"logits must be a nonempty 1-D vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise InputError("logits must be finite")
    shifted = np.exp(z - z.max())
    return shifted / shifted.sum()


@dataclass(frozen=True)
class SmoothedLabel:
    distribution: tuple[float, float, float, float]
    epsilon: float


def smooth_label(one_hot_index: int, epsilon: float) -> SmoothedLabel:
    """Uniform label smoothing: (1 - eps) * onehot + eps/K with K = 4."""
    if not 0 <= one_hot_index < NUM_CLASSES:
        raise InputError(f"label index must be in 0..{NUM_CLASSES - 1}, got {one_hot_index}")
    if not 0.0 <= epsilon <= 1.0:
        raise InputError(f"epsilon must be in [0, 1], got {epsilon}")
    base = epsilon / NUM_CLASSES
    dist = [base] * NUM_CLASSES
    dist[one_hot_index] += 1.0 - epsilon
    return SmoothedLabel(distribution=tuple(dist), epsilon=epsilon)


def cross_entropy(target: Sequence[float], predicted: Sequence[float]) -> float:
    """-sum(target * ln(predicted)) with predictions clamped to >= 1e-12."""
    t = np.asarray(target, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if t.shape != p.shape:
        raise InputError(f"length mismatch: target {t.shape} vs predicted {p.shape}")
    return float(-(t * np.log(np.maximum(p, 1e-12))).sum())


@dataclass(frozen=True)
class ScheduleParams:
    initial_lr: float
    decay_steps: int
    alpha: float = 0.0

    def __post_init__(self) -> None:
        if self.initial_lr <= 0:
            raise InputError(f"initial_lr must be > 0, got {self.initial_lr}")
        if self.decay_steps <= 0:
            raise InputError(f"decay_steps must be > 0, got {self.decay_steps}")
        if not 0.0 <= self.alpha < 1.0:
            raise InputError(f"alpha must be in [0, 1), got {self.alpha}")


def cosine_decay_lr(params: ScheduleParams, step: int) -> float:
    """Half-cosine decay from initial_lr to alpha * initial_lr over decay_steps.

    Constant at the floor for step >= decay_steps.
    """
    if step < 0:
        raise InputError(f"step must be >= 0, got {step}")
    progress = min(step, params.decay_steps) / params.decay_steps
    cosine = 0.5 * (1.0 + math.cos(math.pi * progress))
    return params.initial_lr * ((1.0 - params.alpha) * cosine + params.alpha)


@dataclass(frozen=True)
class EarlyStopState:
    patience: int
    best_metric: float = float("-inf")
    best_epoch: int = 0
    epochs_since_improve: int = 0
    stopped: bool = False

    def __post_init__(self) -> None:
        if self.patience <= 0:
            raise InputError(f"patience must be > 0, got {self.patience}")


def early_stop_update(state: EarlyStopState, epoch_metric: float) -> EarlyStopState:
    """Advance the early-stop state machine by one epoch.

    Improvement is strict; ties count as non-improvement. ``best_epoch`` is
    1-based, so the current epoch is best_epoch + epochs_since_improve.
    """
    if not math.isfinite(epoch_metric):
        raise InputError(f"metric must be finite, got {epoch_metric}")
    if epoch_metric > state.best_metric:
        return replace(
            state,
            best_metric=epoch_metric,
            best_epoch=state.best_epoch + state.epochs_since_improve + 1,
            epochs_since_improve=0,
            stopped=False,
        )
    since = state.epochs_since_improve + 1
    return replace(state, epochs_since_improve=since, stopped=since >= state.patience)


def epoch_steps(total_images: int, batch_size: int) -> int:
    """Steps per epoch: ceil(total_images / batch_size); a partial batch counts."""
    if total_images < 1 or batch_size < 1:
        raise InputError(f"counts must be >= 1, got images={total_images} batch={batch_size}")
    return -(-total_images // batch_size)


def validation_split(
    items_by_class: Mapping[str, Sequence[str]],
    fraction: float,
) -> tuple[dict[str, list[str]], dict[str, list[str]]]:
    """Per class, the last floor(fraction * n) items (after lexicographic sort)
    become validation; the rest train. Deterministic for a given listing."""
    if not 0.0 < fraction < 1.0:
        raise InputError(f"fraction must be in (0, 1), got {fraction}")
    train: dict[str, list[str]] = {}
    val: dict[str, list[str]] = {}
    for class_name, items in items_by_class.items():
        ordered = sorted(items)
        n_val = math.floor(fraction * len(ordered))
        cut = len(ordered) - n_val
        train[class_name] = ordered[:cut]
        val[class_name] = ordered[cut:]
    return train, val


def conv2d(image: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Valid (no padding) cross-correlation with an odd n x n kernel."""
    img = np.asarray(image, dtype=np.float64)
    ker = np.asarray(kernel, dtype=np.float64)
    if ker.ndim != 2 or ker.shape[0] != ker.shape[1]:
        raise InputError(f"kernel must be square, got shape {ker.shape}")
    n = ker.shape[0]
    if n % 2 == 0:
        raise InputError(f"kernel size must be odd, got {n}")
    if img.ndim != 2 or img.shape[0] < n or img.shape[1] < n:
        raise InputError(f"image {img.shape} smaller than kernel {n}x{n}")
    out_h = img.shape[0] - n + 1
    out_w = img.shape[1] - n + 1
    out = np.zeros((out_h, out_w), dtype=np.float64)
    for dy in range(n):
        for dx in range(n):
            out += ker[dy, dx] * img[dy : dy + out_h, dx : dx + out_w]
    return out


def _conv_column(image: np.ndarray, u: np.ndarray) -> np.ndarray:
    n = u.size
    out_h = image.shape[0] - n + 1
    out = np.zeros((out_h, image.shape[1]), dtype=np.float64)
    for dy in range(n):
        out += u[dy] * image[dy : dy + out_h, :]
    return out


def _conv_row(image: np.ndarray, v: np.ndarray) -> np.ndarray:
    n = v.size
    out_w = image.shape[1] - n + 1
    out = np.zeros((image.shape[0], out_w), dtype=np.float64)
    for dx in range(n):
        out += v[dx] * image[:, dx : dx + out_w]
    return out


def separable_equivalence(u: Sequence[float], v: Sequence[float], image: np.ndarray) -> float:
    """Max |direct n x n pass - (column pass, then row pass)| for the rank-1
    kernel u v^T. Zero (to rounding) exactly when the factorization is valid."""
    uc = np.asarray(u, dtype=np.float64).reshape(-1)
    vr = np.asarray(v, dtype=np.float64).reshape(-1)
    if uc.size != vr.size:
        raise InputError(f"u and v must have equal length, got {uc.size} and {vr.size}")
    if uc.size % 2 == 0:
        raise InputError(f"vector length must be odd, got {uc.size}")
    direct = conv2d(image, np.outer(uc, vr))
    composed = _conv_row(_conv_column(np.asarray(image, dtype=np.float64), uc), vr)
    return float(np.abs(direct - composed).max())
