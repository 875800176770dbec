"""Streaming smoothing over classification results.

The smoothed label for a frame is the floating mode: the most frequent label
within the window of the most recent results (default 15), ties broken by the
most recent occurrence among the tied labels. The floating mean averages the
modal label's probability across every frame in the window.
"""

from __future__ import annotations

from dataclasses import dataclass

from .classifier import CLASS_ORDER, ClassificationResult, Label
from .errors import InputError

DEFAULT_WINDOW = 15


@dataclass(frozen=True)
class TemporalState:
    capacity: int = DEFAULT_WINDOW
    window: tuple[ClassificationResult, ...] = ()
    frames_seen: int = 0

    def __post_init__(self) -> None:
        if self.capacity < 1:
            raise InputError(f"window capacity must be >= 1, got {self.capacity}")
        if len(self.window) != min(self.frames_seen, self.capacity):
            raise InputError("window length inconsistent with frames_seen")


@dataclass(frozen=True)
class SmoothedFrameResult:
    frame_index: int
    raw: ClassificationResult
    mode_label: Label
    mode_mean: float


@dataclass(frozen=True)
class RunReport:
    frames_processed: int
    elapsed: float
    fps: float
    #: percent of frames whose smoothed label is each class, canonical order;
    #: None for a zero-frame run
    label_percentages: tuple[float, float, float, float] | None


def floating_mode(window: tuple[ClassificationResult, ...]) -> Label:
    """Most frequent label; ties go to the most recently seen tied label."""
    counts: dict[Label, int] = {}
    for result in window:
        counts[result.label] = counts.get(result.label, 0) + 1
    top = max(counts.values())
    tied = {label for label, count in counts.items() if count == top}
    for result in reversed(window):
        if result.label in tied:
            return result.label
    raise AssertionError("window cannot be empty")


def push_frame(
    state: TemporalState, result: ClassificationResult
) -> tuple[TemporalState, SmoothedFrameResult]:
    """Append a frame result, evicting the oldest once past capacity."""
    window = (state.window + (result,))[-state.capacity :]
    next_state = TemporalState(
        capacity=state.capacity,
        window=window,
        frames_seen=state.frames_seen + 1,
    )
    mode = floating_mode(window)
    mean = sum(r.probs[mode] for r in window) / len(window)
    smoothed = SmoothedFrameResult(
        frame_index=state.frames_seen,
        raw=result,
        mode_label=mode,
        mode_mean=mean,
    )
    return next_state, smoothed


def finalize_run(history: list[SmoothedFrameResult], elapsed: float) -> RunReport:
    """Per-label percentages over the smoothed labels plus throughput."""
    if elapsed <= 0:
        raise InputError(f"elapsed must be > 0, got {elapsed}")
    frames = len(history)
    if frames == 0:
        return RunReport(frames_processed=0, elapsed=elapsed, fps=0.0, label_percentages=None)
    counts = [0] * len(CLASS_ORDER)
    for item in history:
        counts[item.mode_label] += 1
    percentages = tuple(100.0 * count / frames for count in counts)
    return RunReport(
        frames_processed=frames,
        elapsed=elapsed,
        fps=frames / elapsed,
        label_percentages=percentages,  # type: ignore[arg-type]
    )
