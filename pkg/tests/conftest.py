import numpy as np
import pytest

from halfspace_ns.model import dimensionless


@pytest.fixture
def monatomic():
    """gamma = 5/3, mu_hat = kappa_hat = 1 at M = 1."""
    return dimensionless(5.0 / 3.0, 1.0, 1.0, 1.0)


@pytest.fixture
def supersonic():
    return dimensionless(5.0 / 3.0, 1.0, 1.0, 2.0)


@pytest.fixture
def subsonic():
    return dimensionless(5.0 / 3.0, 1.0, 1.0, 0.8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


@pytest.fixture
def accept():
    """Record one acceptance line; the test asserts separately."""
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        ACCEPTANCE.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: float(s.split()[2].rstrip(":").replace("full", "99"))):
            terminalreporter.write_line(line)
