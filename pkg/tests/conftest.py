import sys


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance PASS/FAIL lines outside pytest's capture."""
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None) if mod else None
    if lines:
        terminalreporter.section("acceptance report")
        for line in lines:
            terminalreporter.write_line(line)
