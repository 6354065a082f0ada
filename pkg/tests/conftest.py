import _report


def pytest_terminal_summary(terminalreporter):
    if not _report.LINES:
        return
    terminalreporter.section("acceptance")
    for n in sorted(_report.LINES):
        terminalreporter.write_line(_report.LINES[n])
