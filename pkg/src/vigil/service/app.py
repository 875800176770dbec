"""FastAPI service exposing the pipeline.

Paths in requests (scripted backends, model files, dataset roots) resolve on
the server's filesystem; the bundled CLI runs the app in-process by default,
so those paths are local paths in the common case.
"""

from __future__ import annotations

import base64
import binascii
import threading
import time
import uuid

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, pipeline
from ..classifier import ClassificationResult, parse_backend_spec
from ..enhance import EnhancePolicy
from ..errors import InputError, SessionError, VigilError
from ..imageio import decode_image_bytes, encode_png
from ..luminance import DarkReport, dark_stats, format_stats_table  # noqa: F401  (table used by CLI)
from ..netmath import ScheduleParams, cosine_decay_lr
from ..raster import Raster
from ..temporal import SmoothedFrameResult
from . import schemas

_STATUS_BY_KIND = {
    "input": 400,
    "tile": 400,
    "backend": 502,
    "session": 404,
    "internal": 500,
}


def _result_model(result: ClassificationResult) -> schemas.ResultModel:
    return schemas.ResultModel(
        label=result.label.wire_name,
        confidence=result.confidence,
        probs=list(result.probs),
    )


def _dark_model(dark: DarkReport) -> schemas.DarkModel:
    return schemas.DarkModel(
        dark_pixel_count=dark.dark_pixel_count,
        total_pixels=dark.total_pixels,
        ratio=dark.ratio,
        is_dark=dark.is_dark,
    )


def _frame_model(
    smoothed: SmoothedFrameResult, applied: bool, annotated_b64: str | None
) -> schemas.PushFrameResponse:
    return schemas.PushFrameResponse(
        frame_index=smoothed.frame_index,
        raw=_result_model(smoothed.raw),
        mode_label=smoothed.mode_label.wire_name,
        mode_mean=smoothed.mode_mean,
        enhancement_applied=applied,
        annotated_png_b64=annotated_b64,
    )


def _decode_b64(data: str, what: str) -> bytes:
    try:
        return base64.b64decode(data, validate=True)
    except (binascii.Error, ValueError) as exc:
        raise InputError(f"{what} is not valid base64: {exc}") from exc


def _encode_annotated(raster: Raster | None) -> str | None:
    if raster is None:
        return None
    return base64.b64encode(encode_png(raster)).decode("ascii")


def _policy(options: schemas.EnhanceOptions) -> EnhancePolicy:
    return EnhancePolicy(
        mode=options.mode,
        gamma=options.gamma,
        pixel_threshold=options.pixel_threshold,
        ratio_threshold=options.ratio_threshold,
    )


class _SessionStore:
    def __init__(self) -> None:
        self._sessions: dict[str, pipeline.VideoSession] = {}
        self._lock = threading.Lock()

    def create(self, session: pipeline.VideoSession) -> str:
        session_id = uuid.uuid4().hex
        with self._lock:
            self._sessions[session_id] = session
        return session_id

    def get(self, session_id: str) -> pipeline.VideoSession:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None or session.finalized:
            raise SessionError(f"unknown or finalized session {session_id}")
        return session

    def drop(self, session_id: str) -> None:
        with self._lock:
            self._sessions.pop(session_id, None)


def create_app() -> FastAPI:
    app = FastAPI(title="vigil", version=__version__)
    store = _SessionStore()

    @app.exception_handler(VigilError)
    async def _vigil_error(_request: Request, exc: VigilError) -> JSONResponse:
        status = _STATUS_BY_KIND.get(exc.kind, 500)
        return JSONResponse(
            status_code=status,
            content={"detail": {"kind": exc.kind, "message": str(exc)}},
        )

    @app.get("/healthz", response_model=schemas.HealthResponse)
    def healthz() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/v1/classify", response_model=schemas.ClassifyResponse)
    def classify_endpoint(req: schemas.ClassifyRequest) -> schemas.ClassifyResponse:
        img = decode_image_bytes(_decode_b64(req.image_b64, "image_b64"))
        backend = parse_backend_spec(req.backend)
        outcome = pipeline.run_classify(
            img,
            backend,
            _policy(req.enhance),
            extern_command=req.enhance.extern_command,
            annotate_output=req.annotate,
        )
        return schemas.ClassifyResponse(
            image=schemas.ImageInfo(width=img.width, height=img.height),
            backend=req.backend,
            result=_result_model(outcome.result),
            dark=_dark_model(outcome.dark),
            enhancement_applied=outcome.enhancement_applied,
            enhance_mode=req.enhance.mode,
            gamma=req.enhance.gamma,
            elapsed_s=outcome.elapsed_s,
            warnings=outcome.warnings,
            annotated_png_b64=_encode_annotated(outcome.annotated),
        )

    @app.post("/v1/localize", response_model=schemas.LocalizeResponse)
    def localize_endpoint(req: schemas.LocalizeRequest) -> schemas.LocalizeResponse:
        img = decode_image_bytes(_decode_b64(req.image_b64, "image_b64"))
        backend = parse_backend_spec(req.backend)
        outcome = pipeline.run_localize(
            img,
            backend,
            rows=req.rows,
            cols=req.cols,
            policy=_policy(req.enhance),
            extern_command=req.enhance.extern_command,
            annotate_output=req.annotate,
        )
        return schemas.LocalizeResponse(
            image=schemas.ImageInfo(width=img.width, height=img.height),
            backend=req.backend,
            rows=req.rows,
            cols=req.cols,
            whole=_result_model(outcome.grid.whole),
            tiles=[_result_model(tile) for tile in outcome.grid.tiles],
            match_mask=list(outcome.grid.match_mask),
            invocations=outcome.invocations,
            dark=_dark_model(outcome.dark),
            enhancement_applied=outcome.enhancement_applied,
            elapsed_s=outcome.elapsed_s,
            warnings=outcome.warnings,
            annotated_png_b64=_encode_annotated(outcome.annotated),
        )

    @app.post("/v1/stats", response_model=schemas.StatsResponse)
    def stats_endpoint(req: schemas.StatsRequest) -> schemas.StatsResponse:
        started = time.perf_counter()
        stats = dark_stats(req.root, req.pixel_threshold, req.ratio_threshold)
        return schemas.StatsResponse(
            root=req.root,
            pixel_threshold=req.pixel_threshold,
            ratio_threshold=req.ratio_threshold,
            classes=[
                schemas.ClassStatsModel(
                    class_name=entry.class_name,
                    image_count=entry.image_count,
                    dark_count=entry.dark_count,
                    dark_percentage=entry.dark_percentage,
                )
                for entry in stats.classes
            ],
            skipped=[
                schemas.SkippedFileModel(path=item.path, reason=item.reason)
                for item in stats.skipped
            ],
            elapsed_s=time.perf_counter() - started,
        )

    @app.get("/v1/schedule", response_model=schemas.ScheduleResponse)
    def schedule_endpoint(
        lr: float, steps: int, alpha: float = 0.0, rows: int = 11
    ) -> schemas.ScheduleResponse:
        if rows < 2:
            raise InputError(f"rows must be >= 2, got {rows}")
        params = ScheduleParams(initial_lr=lr, decay_steps=steps, alpha=alpha)
        step_values = sorted({round(i * steps / (rows - 1)) for i in range(rows)})
        return schemas.ScheduleResponse(
            initial_lr=lr,
            decay_steps=steps,
            alpha=alpha,
            rows=[
                schemas.ScheduleRow(step=step, lr=cosine_decay_lr(params, step))
                for step in step_values
            ],
        )

    @app.post("/v1/video/sessions", response_model=schemas.VideoSessionResponse)
    def create_session(req: schemas.VideoSessionRequest) -> schemas.VideoSessionResponse:
        session = pipeline.VideoSession(
            backend=parse_backend_spec(req.backend),
            policy=_policy(req.enhance),
            window=req.window,
            extern_command=req.enhance.extern_command,
            annotate_output=req.annotate,
        )
        return schemas.VideoSessionResponse(session_id=store.create(session), window=req.window)

    @app.post("/v1/video/sessions/{session_id}/frames", response_model=schemas.PushFrameResponse)
    def push_frame_endpoint(session_id: str, req: schemas.PushFrameRequest) -> schemas.PushFrameResponse:
        session = store.get(session_id)
        if (req.image_b64 is None) == (req.raw_rgb_b64 is None):
            raise InputError("provide exactly one of image_b64 or raw_rgb_b64")
        if req.image_b64 is not None:
            img = decode_image_bytes(_decode_b64(req.image_b64, "image_b64"))
        else:
            if req.width is None or req.height is None:
                raise InputError("raw_rgb_b64 frames require width and height")
            img = Raster.from_bytes(req.width, req.height, _decode_b64(req.raw_rgb_b64, "raw_rgb_b64"))
        outcome = session.push(img)
        return _frame_model(outcome.smoothed, outcome.enhancement_applied, _encode_annotated(outcome.annotated))

    @app.post("/v1/video/sessions/{session_id}/finalize", response_model=schemas.VideoFinalizeResponse)
    def finalize_session(session_id: str) -> schemas.VideoFinalizeResponse:
        session = store.get(session_id)
        report = session.finalize()
        store.drop(session_id)
        percentages = None
        if report.label_percentages is not None:
            from ..classifier import CLASS_ORDER

            percentages = dict(zip(CLASS_ORDER, report.label_percentages))
        return schemas.VideoFinalizeResponse(
            frames_processed=report.frames_processed,
            elapsed_s=report.elapsed,
            fps=report.fps,
            label_percentages=percentages,
            window=session.state.capacity,
        )

    @app.delete("/v1/video/sessions/{session_id}")
    def delete_session(session_id: str) -> dict[str, bool]:
        store.drop(session_id)
        return {"deleted": True}

    return app


app = create_app()
