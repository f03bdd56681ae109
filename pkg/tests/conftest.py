import numpy as np
import pytest
from hypothesis import settings

from mpsmetro.symstate import normalize

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def random_state(rng, N, complex_phases=True):
    z = rng.normal(size=N + 1)
    if complex_phases:
        z = z + 1j * rng.normal(size=N + 1)
    return normalize(z)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
