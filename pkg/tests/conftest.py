import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERION = re.compile(r"test_criterion_(\d+)_(\w+?)(?:\[|$)")
_outcomes: dict = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    ok = not report.failed and (report.when != "call" or report.passed)
    if report.when == "call" or report.failed:
        _outcomes[key] = _outcomes.get(key, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for (num, name), ok in sorted(_outcomes.items()):
        terminalreporter.write_line(f"criterion {num:2d} {name:<32} {'PASS' if ok else 'FAIL'}")
