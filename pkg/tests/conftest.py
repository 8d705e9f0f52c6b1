import pytest

_LINES_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request, capsys):
    """Print one PASS/FAIL line for an acceptance criterion and keep it for the summary."""
    lines = request.config.stash.setdefault(_LINES_KEY, [])

    def emit(cid: str, title: str, passed: bool, detail: str = "") -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {title}" + (f" | {detail}" if detail else "")
        lines.append(line)
        with capsys.disabled():
            print("\n" + line)
        return passed
    return emit


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
