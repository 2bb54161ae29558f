import pytest


def pytest_configure(config):
    config.acceptance_lines = []


@pytest.fixture
def report_criterion(request):
    """Record one PASS/FAIL line, shown in the terminal summary."""
    def record(number, ok, detail):
        status = "PASS" if ok else "FAIL"
        request.config.acceptance_lines.append(f"[{status}] criterion {number}: {detail}")
        return ok
    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
