import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Log one pass/fail line for an acceptance criterion, immediately and in the summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def log(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        lines.append(line)
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)

    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
