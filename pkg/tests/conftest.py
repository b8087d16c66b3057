import numpy as np
import pytest

from noncentral_eop import extensions as ext

DEFAULTS = dict(omega=1.0, delta=1.0, C=1.0, D=1.25, G=3.0, F=1.0, p=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def default_spec():
    return ext.PotentialSpec(**DEFAULTS)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "ACCEPTANCE_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
