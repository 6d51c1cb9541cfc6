"""Terminal reporting for the headline checks in test_acceptance.py.

Each check contributes exactly one [PASS]/[FAIL] line to the summary,
so a full run ends with a compact scoreboard of the toolkit's headline
results regardless of how verbose the rest of the session was.
"""

import pytest

_results: dict[str, bool] = {}
_order: list[str] = []


def _record(name: str, passed: bool) -> None:
    if name not in _results:
        _order.append(name)
    _results[name] = passed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if "test_acceptance.py" not in str(item.fspath):
        return
    name = item.nodeid.split("::")[-1]
    if report.when == "call":
        _record(name, report.outcome == "passed")
    elif report.when == "setup" and report.outcome != "passed":
        _record(name, False)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _order:
        return
    terminalreporter.section("headline checks")
    for name in _order:
        flag = "PASS" if _results[name] else "FAIL"
        terminalreporter.write_line(f"[{flag}] {name}")
