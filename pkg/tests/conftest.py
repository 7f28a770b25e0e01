import pytest

_CRITERIA: dict[int, str] = {}


class CriterionLog:
    """Collects one pass/fail line per acceptance criterion."""

    def record(self, number: int, passed: bool, detail: str) -> bool:
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        _CRITERIA[number] = line
        print(line)
        return passed


@pytest.fixture
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[n])
