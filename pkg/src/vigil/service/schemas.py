"""Pydantic request/response models for the HTTP surface."""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field

LabelName = Literal["normal", "smoking", "calling", "smoking_calling"]


class EnhanceOptions(BaseModel):
    mode: Literal["auto", "always", "never"] = "auto"
    gamma: float = Field(default=0.6, gt=0.0, le=1.0)
    pixel_threshold: int = Field(default=50, ge=0, le=255)
    ratio_threshold: float = Field(default=0.3, ge=0.0, le=1.0)
    extern_command: str | None = None


class ImageInfo(BaseModel):
    width: int
    height: int


class ResultModel(BaseModel):
    label: LabelName
    confidence: float
    probs: list[float] = Field(min_length=4, max_length=4)


class DarkModel(BaseModel):
    dark_pixel_count: int
    total_pixels: int
    ratio: float
    is_dark: bool


class ClassifyRequest(BaseModel):
    image_b64: str
    backend: str = "constant:0.25,0.25,0.25,0.25"
    enhance: EnhanceOptions = EnhanceOptions()
    annotate: bool = False


class ClassifyResponse(BaseModel):
    kind: Literal["classify"] = "classify"
    image: ImageInfo
    backend: str
    result: ResultModel
    dark: DarkModel
    enhancement_applied: bool
    enhance_mode: str
    gamma: float
    elapsed_s: float
    warnings: list[str] = []
    annotated_png_b64: str | None = None


class LocalizeRequest(ClassifyRequest):
    rows: int = Field(default=4, ge=1)
    cols: int = Field(default=4, ge=1)


class LocalizeResponse(BaseModel):
    kind: Literal["localize"] = "localize"
    image: ImageInfo
    backend: str
    rows: int
    cols: int
    whole: ResultModel
    tiles: list[ResultModel]
    match_mask: list[bool]
    invocations: int
    dark: DarkModel
    enhancement_applied: bool
    elapsed_s: float
    warnings: list[str] = []
    annotated_png_b64: str | None = None


class StatsRequest(BaseModel):
    root: str
    pixel_threshold: int = Field(default=50, ge=0, le=255)
    ratio_threshold: float = Field(default=0.3, ge=0.0, le=1.0)


class ClassStatsModel(BaseModel):
    class_name: str
    image_count: int
    dark_count: int
    dark_percentage: float | None


class SkippedFileModel(BaseModel):
    path: str
    reason: str


class StatsResponse(BaseModel):
    kind: Literal["stats"] = "stats"
    root: str
    pixel_threshold: int
    ratio_threshold: float
    classes: list[ClassStatsModel]
    skipped: list[SkippedFileModel]
    elapsed_s: float


class ScheduleRow(BaseModel):
    step: int
    lr: float


class ScheduleResponse(BaseModel):
    kind: Literal["schedule"] = "schedule"
    initial_lr: float
    decay_steps: int
    alpha: float
    rows: list[ScheduleRow]


class VideoSessionRequest(BaseModel):
    backend: str = "constant:0.25,0.25,0.25,0.25"
    enhance: EnhanceOptions = EnhanceOptions()
    window: int = Field(default=15, ge=1)
    annotate: bool = False


class VideoSessionResponse(BaseModel):
    session_id: str
    window: int


class PushFrameRequest(BaseModel):
    """Exactly one of image_b64 (PNG/JPEG bytes) or raw_rgb_b64 (+ dimensions)."""

    image_b64: str | None = None
    raw_rgb_b64: str | None = None
    width: int | None = Field(default=None, ge=1)
    height: int | None = Field(default=None, ge=1)


class PushFrameResponse(BaseModel):
    frame_index: int
    raw: ResultModel
    mode_label: LabelName
    mode_mean: float
    enhancement_applied: bool
    annotated_png_b64: str | None = None


class VideoFinalizeResponse(BaseModel):
    kind: Literal["video_run"] = "video_run"
    frames_processed: int
    elapsed_s: float
    fps: float
    label_percentages: dict[str, float] | None
    window: int


class HealthResponse(BaseModel):
    status: str
    version: str
