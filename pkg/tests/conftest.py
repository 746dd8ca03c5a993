"""Shared test configuration.

Collects the acceptance-suite outcomes and prints one pass/fail line per
criterion at the end of the run.
"""

_acceptance_reports = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _acceptance_reports.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_reports:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for report in _acceptance_reports:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else "FAIL"
        terminalreporter.write_line(
            f"[{status}] {name} ({report.duration:.2f}s)"
        )
