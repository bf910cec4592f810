"""Shared pytest plumbing: collect verdict lines for the final report.

Pass/fail verdicts from the acceptance tests are recorded here and
echoed in a terminal-summary section, so they appear exactly once in
the report regardless of output capturing.
"""

VERDICTS = []


def record_verdict(line: str) -> None:
    VERDICTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
