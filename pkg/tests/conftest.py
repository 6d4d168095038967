import pytest

ACCEPTANCE = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = []


@pytest.fixture
def acceptance(request):
    """``acceptance(number, passed, detail)`` records one criterion line."""
    lines = request.config.stash[ACCEPTANCE]

    def record(number, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} criterion {number:>2}: {detail}"
        lines.append((number, line))
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda t: t[0]):
        terminalreporter.write_line(line)
