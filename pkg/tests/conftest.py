import numpy as np
import pytest

from hintbandit.rng import RandomSource


@pytest.fixture
def rng():
    return RandomSource(12345)


def unit(d, i=0):
    e = np.zeros(d)
    e[i] = 1.0
    return e


# Filled by tests/test_acceptance.py: criterion number -> (passed, detail).
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
