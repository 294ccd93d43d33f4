import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from nswk import make_filter, paper_variance_profile, synthesize  # noqa: E402

PAPER_AR = [0.8, 0.1]


@pytest.fixture(scope="session")
def ar2_filter():
    return make_filter(PAPER_AR)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_ns1(ar2_filter):
    """Default AR(2) filter and profile, K=48, P=40: small enough for O(K^4) oracles."""
    return synthesize(ar2_filter, paper_variance_profile(48), 40, seed=7)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])
