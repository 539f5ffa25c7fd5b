"""Shared pytest wiring: the acceptance-criteria scoreboard.

test_acceptance.py records one entry per criterion; the summary hook prints
them as PASS/FAIL lines at the end of every run that touched them.
"""

ACCEPTANCE_RESULTS: list = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(("PASS  " if ok else "FAIL  ") + name)
