import numpy as np
import pytest

from ksdminimax import FiniteDomainModel


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def fd_grad(f, x, h=1e-4):
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        g[j] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def fd_mixed_trace(k, x, y, h=1e-4):
    """sum_j d^2 k / dx_j dy_j by the four-point central stencil."""
    total = 0.0
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h
        total += (k(x + e, y + e) - k(x + e, y - e) - k(x - e, y + e) + k(x - e, y - e)) / (4 * h * h)
    return total


def random_finite_model(rng, K=None, D=None):
    K = int(rng.integers(2, 51)) if K is None else K
    D = int(rng.integers(1, 11)) if D is None else D
    p0 = rng.dirichlet(np.ones(K))
    return FiniteDomainModel.from_raw_features(p0, rng.normal(size=(K, D)))


def two_state_model():
    return FiniteDomainModel(np.array([0.5, 0.5]), np.array([[1.0], [-1.0]]))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
