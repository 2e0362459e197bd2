"""Collects the one-line verdicts of the acceptance criteria for the terminal summary."""

_LINES = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, label in report.user_properties:
        if key == "acceptance":
            verdict = "PASS" if report.passed else "FAIL"
            _LINES.append(f"[{verdict}] {label} ({report.duration:.2f}s)")


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("#")[1].split()[0])):
            terminalreporter.write_line(line)
