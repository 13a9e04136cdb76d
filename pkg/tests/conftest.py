import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.fixture
def verdict(request):
    """Record a one-line detail for the acceptance summary."""
    marker = request.node.get_closest_marker("criterion")
    number = marker.args[0]

    def record(detail):
        _CRITERIA.setdefault(number, {})["detail"] = detail

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    entry = _CRITERIA.setdefault(marker.args[0], {})
    entry["title"] = marker.args[1]
    if report.when == "call" or (report.when == "setup" and report.failed):
        entry["passed"] = report.passed
    elif report.failed:
        entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry.get("passed") else "FAIL"
        line = f"[{status}] {number}. {entry.get('title', '')}"
        if entry.get("detail"):
            line += f" -- {entry['detail']}"
        terminalreporter.write_line(line)
