import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20161107)


def taylor_expm(a: np.ndarray, order: int = 12, squarings: int = 6) -> np.ndarray:
    """exp(a) by truncated Taylor series with scaling and squaring; independent of eigh."""
    scaled = a / 2**squarings
    term = np.eye(a.shape[0], dtype=complex)
    total = term.copy()
    for k in range(1, order + 1):
        term = term @ scaled / k
        total = total + term
    for _ in range(squarings):
        total = total @ total
    return total


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report_criterion():
    """Record one PASS/FAIL line per acceptance criterion and fail on FAIL."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
