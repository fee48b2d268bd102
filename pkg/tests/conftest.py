def pytest_terminal_summary(terminalreporter):
    from tests.test_acceptance import RESULTS, summary_lines

    if RESULTS:
        terminalreporter.section("acceptance")
        for line in summary_lines():
            terminalreporter.write_line(line)
