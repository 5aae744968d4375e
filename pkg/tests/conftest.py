import numpy as np
import pytest

_AC_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ac_report():
    """Record one acceptance line; the test still asserts on its own."""

    def report(number: int, ok: bool, detail: str) -> bool:
        _AC_LINES.append(f"AC{number:<2} {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _AC_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_AC_LINES, key=lambda s: int(s[2:4])):
            terminalreporter.write_line(line)
