import os
import sys

import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.register_profile("thorough", max_examples=400, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = (1 + 5**0.5) / 2


def random_irreducible(rng: np.random.Generator, n: int, density: float = 0.5) -> np.ndarray:
    M = rng.random((n, n)) * (rng.random((n, n)) < density)
    for i in range(n):
        M[i, (i + 1) % n] = max(M[i, (i + 1) % n], 0.1)
    return M


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[key])
