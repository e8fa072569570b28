"""Shared fixtures plus a terminal summary of the acceptance checklist."""

import numpy as np
import pytest

ACCEPTANCE_FILE = "test_acceptance.py"

_results: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if ACCEPTANCE_FILE not in str(item.fspath):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        label = item.function.__doc__ or item.name
        label = label.strip().splitlines()[0]
        _results[label] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _results:
        return
    terminalreporter.section("acceptance checklist")
    for label, status in _results.items():
        terminalreporter.write_line(f"[{status}] {label}")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
