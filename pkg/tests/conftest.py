import itertools
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def enumerate_counts(omegas, a, t):
    """Pure-Python exact enumeration over the bounding box, independent of the package kernels."""
    scales = [Fraction(x) * Fraction(t) for x in a]
    bounds = [int(s) for s in scales]
    out = {"full": 0, "positive": 0, "nonnegative": 0, "hyperplane_union": 0}
    for k in itertools.product(*(range(-b, b + 1) for b in bounds)):
        if sum((Fraction(kj) / s) ** w for kj, s, w in zip(k, scales, omegas)) > 1:
            continue
        out["full"] += 1
        out["positive"] += all(x > 0 for x in k)
        out["nonnegative"] += all(x >= 0 for x in k)
        out["hyperplane_union"] += any(x == 0 for x in k)
    return out


@pytest.fixture
def enumerate_oracle():
    return enumerate_counts


_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_report():
    """Collects one status line per acceptance criterion for the terminal summary."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
