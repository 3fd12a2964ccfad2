import pytest

_LINES: dict[int, str] = {}


class CriterionLog:
    def record(self, number: int, title: str, passed: bool, detail: str) -> None:
        _LINES[number] = f"criterion {number} [{'PASS' if passed else 'FAIL'}] {title}: {detail}"
        print(_LINES[number])


@pytest.fixture(scope="session")
def criteria():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_LINES):
        terminalreporter.write_line(_LINES[k])
