import sys

import numpy as np
import pytest

from spheredisp.geometry import retract_exp, sample_uniform


def tangent_basis(x):
    """Orthonormal basis of the tangent space at ``x`` (rows)."""
    m = x.shape[0]
    q, _ = np.linalg.qr(np.column_stack([x, np.eye(m)]))
    return q[:, 1:m].T


def fd_riemannian_grad(loss, X, h=1e-6):
    """Central differences of ``loss`` through the exponential map, one tangent direction at a time."""
    n, m = X.shape
    G = np.zeros_like(X)
    for i in range(n):
        for e in tangent_basis(X[i]):
            Xp = X.copy()
            Xm = X.copy()
            Xp[i] = retract_exp(X[i], h * e)
            Xm[i] = retract_exp(X[i], -h * e)
            G[i] += (loss(Xp) - loss(Xm)) / (2 * h) * e
    return G


def rel_err(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def config(rng):
    return sample_uniform(14, 7, rng)


def pytest_terminal_summary(terminalreporter):
    board = getattr(sys.modules.get("test_acceptance"), "SCOREBOARD", None)
    if board:
        terminalreporter.section("acceptance criteria")
        for k in sorted(board):
            terminalreporter.write_line(board[k])
