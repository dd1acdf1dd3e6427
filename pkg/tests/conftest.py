import re

import pytest

ACCEPTANCE = {}


def _label(name):
    match = re.match(r"test_criterion_(\d+)_(\w+)", name)
    return (int(match.group(1)), match.group(2).replace("_", " ")) if match else None


@pytest.fixture
def record(request):
    """Store the outcome of the calling acceptance test for the end-of-run table."""
    def _record(passed, detail=""):
        ACCEPTANCE[_label(request.node.name)] = (bool(passed), detail)
        return passed
    return _record


def pytest_runtest_logreport(report):
    # criteria that skip or crash before recording still get a line
    label = _label(report.nodeid.rsplit("::", 1)[-1])
    if label is None or report.passed or report.when == "teardown":
        return
    if report.skipped:
        reason = report.longrepr[2] if isinstance(report.longrepr, tuple) else str(report.longrepr)
        ACCEPTANCE.setdefault(label, (None, reason.removeprefix("Skipped: ")))
    elif ACCEPTANCE.get(label, (True,))[0]:
        ACCEPTANCE[label] = (False, "raised before recording a result (see traceback)")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[label]
        status = "SKIP" if passed is None else ("PASS" if passed else "FAIL")
        terminalreporter.write_line(f"{status}  {label[0]} {label[1]}: {detail}")
