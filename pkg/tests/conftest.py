"""Shared pytest wiring.

Tests marked ``@pytest.mark.acceptance(n, "label")`` are collected into a
summary block printed at the end of the run, one PASS/FAIL line per
criterion, so the release gate can be read off directly.
"""
from __future__ import annotations

import numpy as np
import pytest

_ACCEPTANCE: dict[str, tuple[int, str]] = {}
_OUTCOMES: dict[str, bool] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(num, label): release acceptance criterion"
    )


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("acceptance")
        if mark is not None:
            _ACCEPTANCE[item.nodeid] = (mark.args[0], mark.args[1])


def pytest_runtest_logreport(report):
    if report.nodeid not in _ACCEPTANCE:
        return
    if report.when == "call":
        _OUTCOMES[report.nodeid] = report.passed
    elif report.failed:  # setup/teardown error counts as a failure
        _OUTCOMES[report.nodeid] = False
    elif report.when == "setup" and report.skipped:
        _OUTCOMES[report.nodeid] = False


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    rows = sorted(
        (num, label, _OUTCOMES.get(nodeid))
        for nodeid, (num, label) in _ACCEPTANCE.items()
    )
    for num, label, ok in rows:
        status = "PASS" if ok else "FAIL"
        tr.write_line(f"ACCEPTANCE {num:2d} {status} - {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
