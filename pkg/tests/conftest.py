import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_criteria: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    failed = report.failed or (report.when == "call" and report.skipped)
    if report.when == "call" or failed:
        previous = _criteria.get(report.nodeid, ("PASS", ""))[0]
        outcome = "FAIL" if failed or previous == "FAIL" else "PASS"
        _criteria[report.nodeid] = (outcome, props["criterion"])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for outcome, text in sorted(_criteria.values(), key=lambda v: int(v[1].split()[0])):
        terminalreporter.write_line(f"{outcome}  criterion {text}")
