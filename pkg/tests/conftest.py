"""Shared fixtures plus a terminal summary that prints one PASS/FAIL line per
acceptance criterion (tests living in test_acceptance.py)."""

from __future__ import annotations

import numpy as np
import pytest

from vigil.raster import Raster

_acceptance_outcomes: dict[str, str] = {}


def pytest_runtest_logreport(report: pytest.TestReport) -> None:
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.split("::", 1)[1]
    if report.when == "call":
        _acceptance_outcomes[name] = report.outcome.upper()
    elif report.when == "setup" and report.outcome != "passed":
        _acceptance_outcomes[name] = report.outcome.upper()


def pytest_terminal_summary(terminalreporter, exitstatus: int, config) -> None:
    if not _acceptance_outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    width = max(len(name) for name in _acceptance_outcomes) + 2
    for name, outcome in _acceptance_outcomes.items():
        label = {"PASSED": "PASS", "FAILED": "FAIL", "SKIPPED": "SKIP"}.get(outcome, outcome)
        terminalreporter.write_line(f"{name:<{width}} {label}")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240817)


def make_raster(rng: np.random.Generator, width: int, height: int) -> Raster:
    return Raster.from_array(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))
