import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance():
    """Record one ``C<n> PASS/FAIL: ...`` line and return the verdict."""

    def record(label, ok, detail):
        ACCEPTANCE_LINES.append(f"{label} {'PASS' if ok else 'FAIL'}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


def _order(line):
    label = line.split(" ")[0]
    return int(label[1:].rstrip("abcdefgh")), label


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=_order):
        terminalreporter.write_line(line)
