import io
import json
import math
import subprocess
import sys

import jsonschema
import numpy as np
import pytest

from vigil.cli import main
from vigil.imageio import decode_image_file, write_png
from vigil.raster import Raster
from vigil.report_schemas import LABEL_NAMES, SCHEMAS

from conftest import make_raster


@pytest.fixture
def sample_image(tmp_path, rng):
    path = tmp_path / "input.png"
    write_png(make_raster(rng, 400, 400), path)
    return path


def load_report(path):
    report = json.loads(path.read_text())
    jsonschema.validate(report, SCHEMAS[report["kind"]])
    return report


def check_result_consistency(result):
    probs = result["probs"]
    best = max(range(4), key=lambda i: probs[i])
    assert result["label"] == LABEL_NAMES[best]
    assert result["confidence"] == pytest.approx(probs[best])


class TestClassifyCommand:
    def test_success_writes_png_and_report(self, tmp_path, sample_image):
        out_png = tmp_path / "annotated.png"
        report_path = tmp_path / "report.json"
        rc = main([
            "classify", str(sample_image),
            "--backend", "constant:0.1,0.2,0.3,0.4",
            "--out", str(out_png),
            "--report", str(report_path),
        ])
        assert rc == 0
        annotated = decode_image_file(out_png)
        assert (annotated.width, annotated.height) == (400, 400)
        report = load_report(report_path)
        assert report["result"]["label"] == "smoking_calling"
        check_result_consistency(report["result"])
        dark = report["dark"]
        assert dark["ratio"] == pytest.approx(dark["dark_pixel_count"] / dark["total_pixels"])

    def test_missing_input_exits_2(self, tmp_path):
        assert main(["classify", str(tmp_path / "ghost.png")]) == 2

    def test_undecodable_input_exits_2(self, tmp_path):
        bad = tmp_path / "bad.png"
        bad.write_bytes(b"not an image at all")
        assert main(["classify", str(bad)]) == 2

    def test_below_hard_floor_exits_2(self, tmp_path, rng):
        tiny = tmp_path / "tiny.png"
        write_png(make_raster(rng, 20, 20), tiny)
        assert main(["classify", str(tiny)]) == 2

    def test_backend_failure_exits_3(self, sample_image):
        assert main(["classify", str(sample_image), "--backend", "constant:0.5,0.5,0.5,0.5"]) == 3

    def test_unknown_backend_exits_2(self, sample_image):
        assert main(["classify", str(sample_image), "--backend", "wizardry:x"]) == 2

    def test_unwritable_out_exits_1(self, tmp_path, sample_image):
        out_png = tmp_path / "no" / "such" / "dir" / "x.png"
        assert main(["classify", str(sample_image), "--out", str(out_png)]) == 1

    def test_unwritable_report_exits_1(self, tmp_path, sample_image):
        report = tmp_path / "missing-dir" / "r.json"
        assert main(["classify", str(sample_image), "--report", str(report)]) == 1

    def test_dark_image_reports_enhancement(self, tmp_path):
        dark_path = tmp_path / "dark.png"
        write_png(Raster.filled(200, 200, (15, 15, 15)), dark_path)
        report_path = tmp_path / "r.json"
        rc = main(["classify", str(dark_path), "--enhance", "auto", "--report", str(report_path)])
        assert rc == 0
        assert load_report(report_path)["enhancement_applied"] is True

    def test_enhance_off_skips_enhancement(self, tmp_path):
        dark_path = tmp_path / "dark.png"
        write_png(Raster.filled(200, 200, (15, 15, 15)), dark_path)
        report_path = tmp_path / "r.json"
        assert main(["classify", str(dark_path), "--enhance", "off", "--report", str(report_path)]) == 0
        assert load_report(report_path)["enhancement_applied"] is False


class TestLocalizeCommand:
    def test_seventeen_invocations_in_report(self, tmp_path, sample_image):
        report_path = tmp_path / "loc.json"
        rc = main([
            "localize", str(sample_image),
            "--backend", "constant:0.1,0.2,0.3,0.4",
            "--report", str(report_path),
        ])
        assert rc == 0
        report = load_report(report_path)
        assert report["invocations"] == 17
        assert report["rows"] == 4 and report["cols"] == 4
        for tile in report["tiles"]:
            check_result_consistency(tile)
        recomputed = [t["label"] == report["whole"]["label"] for t in report["tiles"]]
        assert report["match_mask"] == recomputed

    def test_scripted_mask_matches_script(self, tmp_path, sample_image):
        script = tmp_path / "script.txt"
        script.write_text("\n".join(["0 1 0 0"] * 9 + ["1 0 0 0"] * 8))
        report_path = tmp_path / "loc.json"
        rc = main(["localize", str(sample_image), "--backend", f"scripted:{script}",
                   "--report", str(report_path)])
        assert rc == 0
        assert load_report(report_path)["match_mask"] == [True] * 8 + [False] * 8

    def test_tile_too_small_exits_4(self, tmp_path, rng):
        small = tmp_path / "small.png"
        write_png(make_raster(rng, 100, 100), small)
        assert main(["localize", str(small)]) == 4

    def test_bad_grid_string_exits_2(self, sample_image):
        assert main(["localize", str(sample_image), "--grid", "four-by-four"]) == 2

    def test_custom_grid(self, tmp_path, sample_image):
        report_path = tmp_path / "loc.json"
        rc = main(["localize", str(sample_image), "--grid", "2x3", "--report", str(report_path)])
        assert rc == 0
        report = load_report(report_path)
        assert report["invocations"] == 7
        assert len(report["tiles"]) == 6


class TestVideoCommand:
    def make_frames(self, tmp_path, rng, count=10):
        frames = tmp_path / "frames"
        frames.mkdir()
        for i in range(count):
            write_png(make_raster(rng, 64, 64), frames / f"frame_{i:03d}.png")
        return frames

    def test_frames_dir_end_to_end(self, tmp_path, rng):
        frames = self.make_frames(tmp_path, rng, count=10)
        script = tmp_path / "script.txt"
        script.write_text("\n".join(["0 1 0 0"] * 6 + ["0 0 1 0"] * 4))
        out_dir = tmp_path / "out"
        report_path = tmp_path / "video.json"
        rc = main([
            "video", "--frames", str(frames),
            "--backend", f"scripted:{script}",
            "--window", "3",
            "--out-dir", str(out_dir),
            "--report", str(report_path),
        ])
        assert rc == 0
        report = load_report(report_path)
        assert report["run"]["frames_processed"] == 10
        assert len(list(out_dir.glob("frame_*.png"))) == 10
        # window 3 trace: smoking until two calling frames accumulate
        labels = [f["mode_label"] for f in report["frames"]]
        assert labels == ["smoking"] * 7 + ["calling"] * 3
        run = report["run"]
        assert run["fps"] == pytest.approx(run["frames_processed"] / run["elapsed_s"], rel=0.01)
        assert sum(run["label_percentages"].values()) == pytest.approx(100.0, abs=0.1)

    def test_empty_frames_dir_exits_2(self, tmp_path):
        frames = tmp_path / "frames"
        frames.mkdir()
        report_path = tmp_path / "video.json"
        assert main(["video", "--frames", str(frames), "--report", str(report_path)]) == 2
        report = load_report(report_path)
        assert report["run"]["frames_processed"] == 0
        assert report["run"]["label_percentages"] is None

    def test_missing_frames_dir_exits_2(self, tmp_path):
        assert main(["video", "--frames", str(tmp_path / "nope")]) == 2

    def test_raw_stdin_with_partial_trailing_frame(self, tmp_path, monkeypatch):
        w = h = 32
        data = bytes([100, 150, 200]) * (w * h) * 4 + b"\x01\x02\x03\x04"
        monkeypatch.setattr(sys, "stdin", type("S", (), {"buffer": io.BytesIO(data)})())
        report_path = tmp_path / "raw.json"
        rc = main([
            "video", "--raw-stdin", "--width", str(w), "--height", str(h),
            "--report", str(report_path),
        ])
        assert rc == 2
        report = load_report(report_path)
        assert report["run"]["frames_processed"] == 4
        assert report["partial_trailing_frame"] is True

    def test_raw_stdin_clean_stream(self, tmp_path, monkeypatch):
        w = h = 32
        data = bytes([100, 150, 200]) * (w * h) * 3
        monkeypatch.setattr(sys, "stdin", type("S", (), {"buffer": io.BytesIO(data)})())
        report_path = tmp_path / "raw.json"
        rc = main([
            "video", "--raw-stdin", "--width", str(w), "--height", str(h),
            "--report", str(report_path),
        ])
        assert rc == 0
        assert load_report(report_path)["run"]["frames_processed"] == 3

    def test_raw_stdin_requires_dimensions(self):
        assert main(["video", "--raw-stdin"]) == 2

    def test_frame_count_preserved(self, tmp_path, rng):
        frames = self.make_frames(tmp_path, rng, count=7)
        out_dir = tmp_path / "out"
        rc = main(["video", "--frames", str(frames), "--out-dir", str(out_dir)])
        assert rc == 0
        assert len(list(out_dir.glob("*.png"))) == 7

    def test_fps_hint_scales_window(self, tmp_path, rng, capsys):
        frames = self.make_frames(tmp_path, rng, count=3)
        report_path = tmp_path / "v.json"
        rc = main(["video", "--frames", str(frames), "--fps-hint", "10", "--report", str(report_path)])
        assert rc == 0
        assert load_report(report_path)["window"] == 5  # 0.5 s at 10 fps


class TestStatsCommand:
    def test_synthetic_corpus_and_report(self, tmp_path, capsys):
        root = tmp_path / "data"
        for name, rgb, count in (("classA", (0, 0, 0), 10), ("classB", (255, 255, 255), 10)):
            d = root / name
            d.mkdir(parents=True)
            for i in range(count):
                write_png(Raster.filled(16, 16, rgb), d / f"{i}.png")
        report_path = tmp_path / "stats.json"
        rc = main(["stats", str(root), "--report", str(report_path)])
        assert rc == 0
        captured = capsys.readouterr().out
        assert "100.0%" in captured and "0.0%" in captured
        report = load_report(report_path)
        from vigil.luminance import dark_percentage

        for entry in report["classes"]:
            assert entry["dark_percentage"] == dark_percentage(entry["dark_count"], entry["image_count"])

    def test_missing_root_exits_2(self, tmp_path):
        assert main(["stats", str(tmp_path / "missing")]) == 2


class TestScheduleCommand:
    def parse_rows(self, out):
        rows = []
        for line in out.strip().splitlines()[1:]:
            step_str, lr_str = line.split()
            rows.append((int(step_str), float(lr_str)))
        return rows

    def test_table_endpoints_and_midpoint(self, capsys):
        rc = main(["schedule", "--lr", "0.2", "--steps", "100", "--rows", "5"])
        assert rc == 0
        rows = self.parse_rows(capsys.readouterr().out)
        by_step = dict(rows)
        assert by_step[0] == pytest.approx(0.2)
        assert by_step[50] == pytest.approx(0.1)
        assert by_step[100] == pytest.approx(0.0, abs=1e-15)

    def test_invalid_params_exit_2(self):
        assert main(["schedule", "--lr", "-1", "--steps", "100"]) == 2
        assert main(["schedule", "--lr", "0.1", "--steps", "0"]) == 2
        assert main(["schedule", "--lr", "0.1", "--steps", "10", "--alpha", "1.0"]) == 2


class TestArgumentErrors:
    def test_no_command_exits_2(self, capsys):
        assert main([]) == 2

    def test_video_requires_source(self, capsys):
        assert main(["video"]) == 2


class TestConsoleScript:
    def test_installed_entrypoint(self, tmp_path, rng):
        image = tmp_path / "img.png"
        write_png(make_raster(rng, 200, 200), image)
        proc = subprocess.run(
            [sys.executable, "-m", "vigil.cli", "classify", str(image),
             "--backend", "constant:1,0,0,0"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert "normal" in proc.stdout
