"""Shared test plumbing: surfaces the per-criterion acceptance summary
lines on the terminal even when output capture is active."""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)
