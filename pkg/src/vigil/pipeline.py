"""Composition layer: enhancement gate + classification + localization +
video-session state, with timing. The service endpoints are thin wrappers
around these; the CLI reaches them over HTTP.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from . import annotate
from .classifier import Backend, ClassificationResult, classify
from .enhance import EnhancePolicy, ExternalEnhancer, maybe_enhance
from .localize import TileGrid, localize, render_localization
from .luminance import DarkReport, dark_report
from .raster import SOFT_MIN_SIDE, Raster, to_gray
from .temporal import RunReport, SmoothedFrameResult, TemporalState, finalize_run, push_frame


def build_enhancer(extern_command: str | None) -> ExternalEnhancer | None:
    return ExternalEnhancer(extern_command) if extern_command else None


def _size_warnings(img: Raster) -> list[str]:
    if img.width < SOFT_MIN_SIDE or img.height < SOFT_MIN_SIDE:
        return [
            f"image {img.width}x{img.height} is below the recommended "
            f"{SOFT_MIN_SIDE}x{SOFT_MIN_SIDE} minimum"
        ]
    return []


@dataclass(frozen=True)
class ClassifyOutcome:
    result: ClassificationResult
    dark: DarkReport
    enhancement_applied: bool
    elapsed_s: float
    warnings: list[str]
    annotated: Raster | None


def run_classify(
    img: Raster,
    backend: Backend,
    policy: EnhancePolicy,
    extern_command: str | None = None,
    annotate_output: bool = False,
) -> ClassifyOutcome:
    started = time.perf_counter()
    dark = dark_report(to_gray(img), policy.pixel_threshold, policy.ratio_threshold)
    enhanced, applied = maybe_enhance(img, policy, build_enhancer(extern_command))
    result = classify(backend, enhanced)
    annotated = None
    if annotate_output:
        pixels = enhanced.pixels.copy()
        annotate.draw_label_box(pixels, 0, 0, f"{result.label.wire_name} {result.confidence:.2f}")
        annotated = Raster(width=enhanced.width, height=enhanced.height, pixels=pixels)
    return ClassifyOutcome(
        result=result,
        dark=dark,
        enhancement_applied=applied,
        elapsed_s=time.perf_counter() - started,
        warnings=_size_warnings(img),
        annotated=annotated,
    )


@dataclass(frozen=True)
class LocalizeOutcome:
    grid: TileGrid
    invocations: int
    dark: DarkReport
    enhancement_applied: bool
    elapsed_s: float
    warnings: list[str]
    annotated: Raster | None


def run_localize(
    img: Raster,
    backend: Backend,
    rows: int = 4,
    cols: int = 4,
    policy: EnhancePolicy | None = None,
    extern_command: str | None = None,
    annotate_output: bool = False,
) -> LocalizeOutcome:
    policy = policy or EnhancePolicy()
    started = time.perf_counter()
    dark = dark_report(to_gray(img), policy.pixel_threshold, policy.ratio_threshold)
    enhanced, applied = maybe_enhance(img, policy, build_enhancer(extern_command))
    before = backend.invocations
    grid = localize(backend, enhanced, rows=rows, cols=cols)
    invocations = backend.invocations - before
    annotated = render_localization(enhanced, grid) if annotate_output else None
    return LocalizeOutcome(
        grid=grid,
        invocations=invocations,
        dark=dark,
        enhancement_applied=applied,
        elapsed_s=time.perf_counter() - started,
        warnings=_size_warnings(img),
        annotated=annotated,
    )


@dataclass(frozen=True)
class FrameOutcome:
    smoothed: SmoothedFrameResult
    enhancement_applied: bool
    annotated: Raster | None


class VideoSession:
    """Single-stream smoothing session; push_frame order defines frame order.

    Thread-safe via one lock so a shared service instance stays a strictly
    sequential state machine per session.
    """

    def __init__(
        self,
        backend: Backend,
        policy: EnhancePolicy,
        window: int = 15,
        extern_command: str | None = None,
        annotate_output: bool = False,
    ):
        self.backend = backend
        self.policy = policy
        self.enhancer = build_enhancer(extern_command)
        self.annotate_output = annotate_output
        self.state = TemporalState(capacity=window)
        self.history: list[SmoothedFrameResult] = []
        self.processing_seconds = 0.0
        self.finalized = False
        self._lock = threading.Lock()

    def push(self, img: Raster) -> FrameOutcome:
        with self._lock:
            started = time.perf_counter()
            enhanced, applied = maybe_enhance(img, self.policy, self.enhancer)
            result = classify(self.backend, enhanced)
            self.state, smoothed = push_frame(self.state, result)
            self.history.append(smoothed)
            annotated = None
            if self.annotate_output:
                pixels = enhanced.pixels.copy()
                caption = f"{smoothed.mode_label.wire_name} {smoothed.mode_mean:.2f}"
                annotate.draw_label_box(pixels, 0, 0, caption)
                annotated = Raster(width=enhanced.width, height=enhanced.height, pixels=pixels)
            self.processing_seconds += time.perf_counter() - started
            return FrameOutcome(smoothed=smoothed, enhancement_applied=applied, annotated=annotated)

    def finalize(self) -> RunReport:
        with self._lock:
            self.finalized = True
            return finalize_run(self.history, max(self.processing_seconds, 1e-9))
