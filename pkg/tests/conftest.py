from __future__ import annotations

_verdicts: list[str] = []


def pytest_runtest_logreport(report):
    if report.when == "call":
        _verdicts.extend(v for k, v in report.user_properties if k == "verdict")


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance verdicts")
        for line in sorted(_verdicts):
            terminalreporter.write_line(line)
