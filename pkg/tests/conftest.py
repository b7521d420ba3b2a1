import pytest

_VERDICTS: list[str] = []


class _Recorder:
    def __call__(self, name: str, ok: bool, detail: str = "") -> bool:
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  [{detail}]" if detail else "")
        _VERDICTS.append(line)
        print(line)
        return ok


@pytest.fixture
def verdict():
    """Record a PASS/FAIL line for the acceptance summary."""
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
