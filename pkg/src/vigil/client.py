"""HTTP client for the service.

With no server URL the app runs in-process over an ASGI transport, so the
CLI works standalone while staying a pure HTTP client of the service;
``--server`` switches the same code path to a remote instance.
"""

from __future__ import annotations

import base64
from typing import Any

import httpx


class ServiceError(Exception):
    """An error payload from the service, carrying its wire `kind`."""

    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


class ServiceClient:
    def __init__(self, server_url: str | None = None, timeout: float = 300.0):
        if server_url is None:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service.app import create_app

            self._client: httpx.Client = TestClient(create_app(), raise_server_exceptions=False)
        else:
            self._client = httpx.Client(base_url=server_url, timeout=timeout)

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()

    def _unwrap(self, response: httpx.Response) -> dict[str, Any]:
        if response.status_code < 400:
            return response.json()
        try:
            detail = response.json().get("detail")
        except ValueError:
            raise ServiceError("internal", response.text) from None
        if isinstance(detail, dict) and "kind" in detail:
            raise ServiceError(detail["kind"], detail.get("message", ""))
        # FastAPI validation errors arrive as a list under detail
        raise ServiceError("input", str(detail))

    def classify(
        self,
        image_bytes: bytes,
        backend: str,
        enhance: dict[str, Any],
        annotate: bool = False,
    ) -> dict[str, Any]:
        return self._unwrap(
            self._client.post(
                "/v1/classify",
                json={
                    "image_b64": base64.b64encode(image_bytes).decode("ascii"),
                    "backend": backend,
                    "enhance": enhance,
                    "annotate": annotate,
                },
            )
        )

    def localize(
        self,
        image_bytes: bytes,
        backend: str,
        enhance: dict[str, Any],
        rows: int,
        cols: int,
        annotate: bool = False,
    ) -> dict[str, Any]:
        return self._unwrap(
            self._client.post(
                "/v1/localize",
                json={
                    "image_b64": base64.b64encode(image_bytes).decode("ascii"),
                    "backend": backend,
                    "enhance": enhance,
                    "annotate": annotate,
                    "rows": rows,
                    "cols": cols,
                },
            )
        )

    def stats(self, root: str, pixel_threshold: int, ratio_threshold: float) -> dict[str, Any]:
        return self._unwrap(
            self._client.post(
                "/v1/stats",
                json={
                    "root": root,
                    "pixel_threshold": pixel_threshold,
                    "ratio_threshold": ratio_threshold,
                },
            )
        )

    def schedule(self, lr: float, steps: int, alpha: float, rows: int) -> dict[str, Any]:
        return self._unwrap(
            self._client.get(
                "/v1/schedule",
                params={"lr": lr, "steps": steps, "alpha": alpha, "rows": rows},
            )
        )

    def create_video_session(
        self,
        backend: str,
        enhance: dict[str, Any],
        window: int,
        annotate: bool = False,
    ) -> str:
        payload = self._unwrap(
            self._client.post(
                "/v1/video/sessions",
                json={"backend": backend, "enhance": enhance, "window": window, "annotate": annotate},
            )
        )
        return payload["session_id"]

    def push_image_frame(self, session_id: str, image_bytes: bytes) -> dict[str, Any]:
        return self._unwrap(
            self._client.post(
                f"/v1/video/sessions/{session_id}/frames",
                json={"image_b64": base64.b64encode(image_bytes).decode("ascii")},
            )
        )

    def push_raw_frame(self, session_id: str, raw: bytes, width: int, height: int) -> dict[str, Any]:
        return self._unwrap(
            self._client.post(
                f"/v1/video/sessions/{session_id}/frames",
                json={
                    "raw_rgb_b64": base64.b64encode(raw).decode("ascii"),
                    "width": width,
                    "height": height,
                },
            )
        )

    def finalize_video_session(self, session_id: str) -> dict[str, Any]:
        return self._unwrap(self._client.post(f"/v1/video/sessions/{session_id}/finalize"))
