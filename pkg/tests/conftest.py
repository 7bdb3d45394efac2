"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_criteria: dict[str, bool] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        _criteria[name] = _criteria.get(name, True) and report.passed
    elif report.failed:
        _criteria[name] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in _criteria.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}")
    passed = sum(_criteria.values())
    terminalreporter.write_line(f"{passed}/{len(_criteria)} criteria met")
