"""Command-line client for the pipeline service.

The CLI is a thin HTTP client: by default the service app runs in-process,
and ``--server`` points the same commands at a remote instance. Local file
I/O (reading images, writing annotated PNGs and JSON reports) stays on the
client side.

Exit codes: 0 success, 1 output I/O failure, 2 bad input, 3 backend failure,
4 tile too small for the requested grid.
"""

from __future__ import annotations

import argparse
import base64
import json
import sys
from pathlib import Path
from typing import Any

from .client import ServiceClient, ServiceError

EXIT_OK = 0
EXIT_IO = 1
EXIT_INPUT = 2
EXIT_BACKEND = 3
EXIT_TILE = 4

_EXIT_BY_KIND = {
    "input": EXIT_INPUT,
    "tile": EXIT_TILE,
    "backend": EXIT_BACKEND,
    "session": EXIT_BACKEND,
    "internal": EXIT_IO,
}

_ENHANCE_MODES = {"auto": "auto", "on": "always", "off": "never"}
_FRAME_SUFFIXES = {".png", ".jpg", ".jpeg"}
# Frame-count horizon of the default window at the reference 30 fps.
_WINDOW_SECONDS = 0.5


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _map_service_error(exc: ServiceError) -> int:
    return _fail(str(exc), _EXIT_BY_KIND.get(exc.kind, EXIT_IO))


def _read_input_file(path: str) -> bytes:
    return Path(path).read_bytes()


def _write_json(path: str, payload: dict[str, Any]) -> None:
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def _write_annotated(path: str, annotated_b64: str | None) -> None:
    if annotated_b64 is None:
        raise OSError("service returned no annotated image")
    Path(path).write_bytes(base64.b64decode(annotated_b64))


def _enhance_options(args: argparse.Namespace) -> dict[str, Any]:
    return {
        "mode": _ENHANCE_MODES[args.enhance],
        "gamma": args.gamma,
        "pixel_threshold": args.pixel_threshold,
        "ratio_threshold": args.ratio_threshold,
        "extern_command": args.extern_enhancer,
    }


def _print_warnings(payload: dict[str, Any]) -> None:
    for warning in payload.get("warnings", []):
        print(f"warning: {warning}", file=sys.stderr)


def _strip_image(payload: dict[str, Any]) -> dict[str, Any]:
    return {key: value for key, value in payload.items() if key != "annotated_png_b64"}


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--backend", default="constant:0.25,0.25,0.25,0.25",
                        help="constant:p0,p1,p2,p3 | scripted:FILE | model:FILE.onnx")
    parser.add_argument("--enhance", choices=sorted(_ENHANCE_MODES), default="auto")
    parser.add_argument("--gamma", type=float, default=0.6)
    parser.add_argument("--pixel-threshold", type=int, default=50)
    parser.add_argument("--ratio-threshold", type=float, default=0.3)
    parser.add_argument("--extern-enhancer", metavar="CMD", default=None,
                        help="external enhancer command (PNG on stdin, PNG on stdout)")
    parser.add_argument("--server", metavar="URL", default=None,
                        help="remote service URL (default: run the service in-process)")


def _parse_grid(spec: str) -> tuple[int, int]:
    rows_str, sep, cols_str = spec.lower().partition("x")
    if not sep:
        raise ValueError(f"grid must look like RxC, got {spec!r}")
    rows, cols = int(rows_str), int(cols_str)
    if rows < 1 or cols < 1:
        raise ValueError(f"grid dimensions must be >= 1, got {spec!r}")
    return rows, cols


def cmd_classify(args: argparse.Namespace) -> int:
    try:
        image_bytes = _read_input_file(args.image)
    except OSError as exc:
        return _fail(f"cannot read input image: {exc}", EXIT_INPUT)
    with ServiceClient(args.server) as client:
        try:
            payload = client.classify(
                image_bytes,
                backend=args.backend,
                enhance=_enhance_options(args),
                annotate=args.out is not None,
            )
        except ServiceError as exc:
            return _map_service_error(exc)
    _print_warnings(payload)
    try:
        if args.out:
            _write_annotated(args.out, payload.get("annotated_png_b64"))
        if args.report:
            _write_json(args.report, _strip_image(payload))
    except OSError as exc:
        return _fail(f"cannot write output: {exc}", EXIT_IO)
    result = payload["result"]
    print(f"{result['label']} {result['confidence']:.4f} "
          f"enhanced={'yes' if payload['enhancement_applied'] else 'no'}")
    return EXIT_OK


def cmd_localize(args: argparse.Namespace) -> int:
    try:
        rows, cols = _parse_grid(args.grid)
    except ValueError as exc:
        return _fail(str(exc), EXIT_INPUT)
    try:
        image_bytes = _read_input_file(args.image)
    except OSError as exc:
        return _fail(f"cannot read input image: {exc}", EXIT_INPUT)
    with ServiceClient(args.server) as client:
        try:
            payload = client.localize(
                image_bytes,
                backend=args.backend,
                enhance=_enhance_options(args),
                rows=rows,
                cols=cols,
                annotate=args.out is not None,
            )
        except ServiceError as exc:
            return _map_service_error(exc)
    _print_warnings(payload)
    try:
        if args.out:
            _write_annotated(args.out, payload.get("annotated_png_b64"))
        if args.report:
            _write_json(args.report, _strip_image(payload))
    except OSError as exc:
        return _fail(f"cannot write output: {exc}", EXIT_IO)
    whole = payload["whole"]
    matches = sum(payload["match_mask"])
    print(f"{whole['label']} {whole['confidence']:.4f} "
          f"{matches}/{rows * cols} tiles match ({payload['invocations']} model runs)")
    return EXIT_OK


def _resolve_window(args: argparse.Namespace) -> int:
    if args.window is not None:
        return args.window
    if args.fps_hint is not None:
        return max(1, round(args.fps_hint * _WINDOW_SECONDS))
    return 15


def _iter_frame_files(directory: Path) -> list[Path]:
    return sorted(
        path for path in directory.iterdir()
        if path.is_file() and path.suffix.lower() in _FRAME_SUFFIXES
    )


def cmd_video(args: argparse.Namespace) -> int:
    window = _resolve_window(args)
    if window < 1:
        return _fail(f"window must be >= 1, got {window}", EXIT_INPUT)
    if args.raw_stdin and (args.width is None or args.height is None):
        return _fail("--raw-stdin requires --width and --height", EXIT_INPUT)

    frame_paths: list[Path] = []
    if args.frames is not None:
        frames_dir = Path(args.frames)
        if not frames_dir.is_dir():
            return _fail(f"frame directory {frames_dir} does not exist", EXIT_INPUT)
        frame_paths = _iter_frame_files(frames_dir)

    out_dir: Path | None = None
    if args.out_dir:
        out_dir = Path(args.out_dir)
        try:
            out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            return _fail(f"cannot create output directory: {exc}", EXIT_IO)

    partial_trailing = False
    frames: list[dict[str, Any]] = []
    with ServiceClient(args.server) as client:
        try:
            session_id = client.create_video_session(
                backend=args.backend,
                enhance=_enhance_options(args),
                window=window,
                annotate=out_dir is not None,
            )
        except ServiceError as exc:
            return _map_service_error(exc)
        try:
            if args.raw_stdin:
                frame_size = args.width * args.height * 3
                stream = sys.stdin.buffer
                while True:
                    chunk = stream.read(frame_size)
                    if not chunk:
                        break
                    if len(chunk) < frame_size:
                        print(
                            f"warning: trailing partial frame of {len(chunk)} bytes "
                            f"(expected {frame_size}); stopping",
                            file=sys.stderr,
                        )
                        partial_trailing = True
                        break
                    frames.append(client.push_raw_frame(session_id, chunk, args.width, args.height))
                    _emit_frame(frames[-1], out_dir)
            else:
                for path in frame_paths:
                    try:
                        image_bytes = _read_input_file(str(path))
                    except OSError as exc:
                        return _fail(f"cannot read frame {path}: {exc}", EXIT_INPUT)
                    frames.append(client.push_image_frame(session_id, image_bytes))
                    _emit_frame(frames[-1], out_dir)
            run = client.finalize_video_session(session_id)
        except ServiceError as exc:
            return _map_service_error(exc)
        except OSError as exc:
            return _fail(f"cannot write output: {exc}", EXIT_IO)

    source = "raw-stdin" if args.raw_stdin else "frames-dir"
    report = {
        "kind": "video",
        "backend": args.backend,
        "window": window,
        "source": source,
        "frames": [_strip_image(frame) for frame in frames],
        "run": run,
        "partial_trailing_frame": partial_trailing,
    }
    if args.report:
        try:
            _write_json(args.report, report)
        except OSError as exc:
            return _fail(f"cannot write report: {exc}", EXIT_IO)

    print(f"frames: {run['frames_processed']}")
    print(f"elapsed: {run['elapsed_s']:.3f} s")
    print(f"fps: {run['fps']:.2f}")
    if run["label_percentages"] is not None:
        for name, pct in run["label_percentages"].items():
            print(f"  {name}: {pct:.1f}%")
    else:
        print("  label percentages: n/a (no frames)")

    if partial_trailing:
        return EXIT_INPUT
    if run["frames_processed"] == 0:
        return _fail("no frames in input", EXIT_INPUT)
    return EXIT_OK


def _emit_frame(frame: dict[str, Any], out_dir: Path | None) -> None:
    if out_dir is None:
        return
    annotated = frame.get("annotated_png_b64")
    if annotated is None:
        raise OSError("service returned no annotated frame")
    (out_dir / f"frame_{frame['frame_index']:06d}.png").write_bytes(base64.b64decode(annotated))


def cmd_stats(args: argparse.Namespace) -> int:
    with ServiceClient(args.server) as client:
        try:
            payload = client.stats(args.root, args.pixel_threshold, args.ratio_threshold)
        except ServiceError as exc:
            return _map_service_error(exc)
    header = f"{'class':<20} {'images':>8} {'dark':>8} {'dark %':>8}"
    print(header)
    print("-" * len(header))
    for entry in payload["classes"]:
        pct = "n/a" if entry["dark_percentage"] is None else f"{entry['dark_percentage']:.1f}%"
        print(f"{entry['class_name']:<20} {entry['image_count']:>8} {entry['dark_count']:>8} {pct:>8}")
    if payload["skipped"]:
        print(f"skipped {len(payload['skipped'])} unreadable file(s)")
    if args.report:
        try:
            _write_json(args.report, payload)
        except OSError as exc:
            return _fail(f"cannot write report: {exc}", EXIT_IO)
    return EXIT_OK


def cmd_schedule(args: argparse.Namespace) -> int:
    with ServiceClient(args.server) as client:
        try:
            payload = client.schedule(args.lr, args.steps, args.alpha, args.rows)
        except ServiceError as exc:
            return _map_service_error(exc)
    print(f"{'step':>10} {'lr':>16}")
    for row in payload["rows"]:
        print(f"{row['step']:>10} {row['lr']:>16.10g}")
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("vigil.service.app:app", host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="vigil", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_classify = sub.add_parser("classify", help="classify one image")
    p_classify.add_argument("image")
    _add_common_options(p_classify)
    p_classify.add_argument("--out", metavar="PNG", default=None)
    p_classify.add_argument("--report", metavar="JSON", default=None)
    p_classify.set_defaults(func=cmd_classify)

    p_localize = sub.add_parser("localize", help="classify an image and its grid tiles")
    p_localize.add_argument("image")
    p_localize.add_argument("--grid", default="4x4", metavar="RxC")
    _add_common_options(p_localize)
    p_localize.add_argument("--out", metavar="PNG", default=None)
    p_localize.add_argument("--report", metavar="JSON", default=None)
    p_localize.set_defaults(func=cmd_localize)

    p_video = sub.add_parser("video", help="smooth a frame stream")
    source = p_video.add_mutually_exclusive_group(required=True)
    source.add_argument("--frames", metavar="DIR", default=None,
                        help="directory of lexicographically ordered frames")
    source.add_argument("--raw-stdin", action="store_true",
                        help="read raw RGB24 frames from stdin")
    p_video.add_argument("--width", type=int, default=None)
    p_video.add_argument("--height", type=int, default=None)
    p_video.add_argument("--window", type=int, default=None)
    p_video.add_argument("--fps-hint", type=float, default=None,
                         help="derive the window from a frame rate instead of --window")
    _add_common_options(p_video)
    p_video.add_argument("--out-dir", metavar="DIR", default=None)
    p_video.add_argument("--report", metavar="JSON", default=None)
    p_video.set_defaults(func=cmd_video)

    p_stats = sub.add_parser("stats", help="per-class dark-image statistics for a dataset")
    p_stats.add_argument("root")
    p_stats.add_argument("--pixel-threshold", type=int, default=50)
    p_stats.add_argument("--ratio-threshold", type=float, default=0.3)
    p_stats.add_argument("--server", metavar="URL", default=None)
    p_stats.add_argument("--report", metavar="JSON", default=None)
    p_stats.set_defaults(func=cmd_stats)

    p_schedule = sub.add_parser("schedule", help="print a cosine-decay learning-rate table")
    p_schedule.add_argument("--lr", type=float, required=True)
    p_schedule.add_argument("--steps", type=int, required=True)
    p_schedule.add_argument("--alpha", type=float, default=0.0)
    p_schedule.add_argument("--rows", type=int, default=11)
    p_schedule.add_argument("--server", metavar="URL", default=None)
    p_schedule.set_defaults(func=cmd_schedule)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return args.func(args)


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
