import sys

import numpy as np
import pytest
from hypothesis import settings

from concurrence_lab.statevec import bell_state, ghz_state, make_state, w_state

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

S = 2**-0.5


@pytest.fixture
def bell():
    return bell_state()


@pytest.fixture
def ghz3():
    return ghz_state(3)


@pytest.fixture
def w3():
    return w_state(3)


@pytest.fixture
def plus_plus():
    return make_state((2, 2), [0.5, 0.5, 0.5, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
