"""Shared test wiring.

The acceptance battery records one PASS/FAIL line per criterion.  Lines
printed inside tests are swallowed by output capture when the test
passes, so the battery appends them here and they are replayed in the
terminal summary where they are always visible.
"""

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
