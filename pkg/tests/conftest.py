"""Shared pytest plumbing: the acceptance scoreboard summary section."""

scoreboard: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if scoreboard:
        terminalreporter.section("acceptance criteria")
        for line in scoreboard:
            terminalreporter.write_line(line)
