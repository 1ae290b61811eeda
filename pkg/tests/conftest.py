import numpy as np
import pytest

from mfrac import HolderFunction

# criterion number -> (passed, detail); filled by test_acceptance, printed at the end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def sinusoid():
    return HolderFunction.sinusoid()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
