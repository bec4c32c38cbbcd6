import numpy as np
import pytest

import pressure_consensus as pc


def random_system(rng, n=None, symmetric=True, max_n=8):
    """A connected random system: a weighted spanning path plus random edges."""
    if n is None:
        n = int(rng.integers(2, max_n + 1))
    adj = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order[:-1], order[1:]):
        adj[a, b] = rng.uniform(0.1, 2.0)
    extra = rng.random((n, n)) < 0.3
    adj[extra] = rng.uniform(0.0, 2.0, size=extra.sum())
    np.fill_diagonal(adj, 0.0)
    if symmetric:
        adj = np.maximum(adj, adj.T)
    stub = rng.uniform(0.05, 3.0, size=n)
    pref = rng.uniform(0.0, 1.0, size=n)
    return pc.build_system(adj, stub, pref)


def log_uniform(rng, lo, hi, size=None):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


@pytest.fixture
def k2():
    return pc.k2_system()


@pytest.fixture
def rng():
    return np.random.default_rng(20201116)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import ACCEPTANCE_LINES
    except ImportError:
        return
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
