import numpy as np
import pytest
from hypothesis import settings

from dissipative_ssh.model import OpenChainModel

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


def chain(t1, n, left=None, right=None, t2=1.0):
    """Shorthand: ``left``/``right`` are (kind, gamma) or None."""
    return OpenChainModel.with_baths(t1, t2, n, left=left, right=right)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
