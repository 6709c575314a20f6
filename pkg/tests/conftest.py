"""Collects ``criterion`` marks and prints one PASS/FAIL line per criterion."""

from collections import defaultdict

import pytest

_results = defaultdict(list)
_titles = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    _titles[number] = title
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _results[number].append((item.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        outcomes = _results[number]
        passed = sum(1 for _, o in outcomes if o == "passed")
        status = "PASS" if passed == len(outcomes) else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:>2}: {status}  {_titles[number]} ({passed}/{len(outcomes)} checks)"
        )
        for nodeid, o in outcomes:
            if o != "passed":
                terminalreporter.write_line(f"    failed: {nodeid.split('::', 1)[-1]}")
