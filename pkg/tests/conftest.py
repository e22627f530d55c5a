import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def verdict(request):
    """Call with (ok, detail); prints and records one PASS/FAIL line, then asserts."""

    def check(ok: bool, detail: str) -> None:
        name = request.node.name
        line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
        print(line)
        _VERDICTS.append(line)
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)

