"""Collects acceptance outcomes and prints one line per criterion."""

import re
from collections import defaultdict

import pytest

_outcomes: dict[int, list[tuple[str, str]]] = defaultdict(list)
_titles: dict[int, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    _titles[number] = title
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        if report.failed:
            message = str(report.longrepr.reprcrash.message) if hasattr(report.longrepr, "reprcrash") else ""
            detail = re.sub(r"\s+", " ", message)[:160]
        _outcomes[number].append((report.outcome, f"{item.name}: {detail}" if detail else item.name))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_outcomes):
        results = _outcomes[number]
        status = "PASS" if all(o == "passed" for o, _ in results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {_titles[number]}")
        for outcome, text in results:
            if outcome != "passed":
                terminalreporter.write_line(f"             {outcome}: {text}")
