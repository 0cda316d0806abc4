import numpy as np
import pytest

from shapebg.density import grid_from_mixture
from shapebg.simulate import builtin_model


@pytest.fixture(scope="session")
def models():
    return {name: builtin_model(name) for name in
            ("s1", "s2", "s3", "s4", "s5", "m1", "m2", "l1", "l2", "l3", "l4", "l5", "gauss")}


@pytest.fixture(scope="session")
def normal_grid(models):
    return grid_from_mixture(models["gauss"], -8.0, 8.0, 1601)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mod.RESULTS:
            terminalreporter.write_line(line)
