"""Shared pytest hooks: per-criterion verdicts for the acceptance suite."""

import pytest

_VERDICTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or (report.when != "call" and report.passed):
        return
    number, title = mark.args
    entry = _VERDICTS.setdefault(number, {"title": title, "ok": True, "notes": []})
    if not report.passed:
        entry["ok"] = False
    if report.when == "call":
        entry["notes"] += [v for k, v in item.user_properties if k == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_VERDICTS):
        entry = _VERDICTS[number]
        verdict = "PASS" if entry["ok"] else "FAIL"
        notes = "; ".join(entry["notes"])
        line = f"criterion {number} {verdict}: {entry['title']}"
        terminalreporter.write_line(f"{line} ({notes})" if notes else line)
