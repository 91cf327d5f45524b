"""Shared fixtures and the acceptance summary hook."""

import pytest

from tukeyreduce.client import ServiceClient


@pytest.fixture(scope="session")
def api():
    with ServiceClient() as client:
        yield client


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # one PASS/FAIL line per acceptance criterion, printed after the run
    results = {}
    for outcome in ("failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in nodeid:
                results[nodeid.split("::", 1)[1]] = "FAIL"
    for rep in terminalreporter.stats.get("passed", []):
        nodeid = getattr(rep, "nodeid", "")
        if "test_acceptance.py::test_criterion_" in nodeid and rep.when == "call":
            results.setdefault(nodeid.split("::", 1)[1], "PASS")
    for rep in terminalreporter.stats.get("skipped", []):
        nodeid = getattr(rep, "nodeid", "")
        if "test_acceptance.py::test_criterion_" in nodeid:
            results.setdefault(nodeid.split("::", 1)[1], "SKIP")
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        label = name.replace("test_criterion_", "criterion ").replace("_", " ")
        terminalreporter.write_line(f"{label}: {results[name]}")
