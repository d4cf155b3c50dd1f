import numpy as np
import pytest

from psgraph import build_graph, eigendecompose, erdos_renyi
from psgraph.graph import adjacency, weakly_connected_components
from psgraph.spectral import SHIFT_ADJACENCY


@pytest.fixture
def path2():
    """Two vertices joined by one edge."""
    return build_graph(2, [(0, 1, 1.0)])


@pytest.fixture
def path2_basis(path2):
    """Laplacian basis of the 2-path: eigenvalues (0, 2)."""
    lap = np.array([[1.0, -1.0], [-1.0, 1.0]])
    return eigendecompose(lap)


@pytest.fixture
def path4():
    return build_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)])


def random_connected_graph(rng, n_low=2, n_high=10, p_low=0.3, p_high=0.9):
    """Rejection-sample a connected undirected ER graph."""
    while True:
        n = int(rng.integers(n_low, n_high + 1))
        p = float(rng.uniform(p_low, p_high))
        g = erdos_renyi(n, p, seed=int(rng.integers(0, 10 ** 6)))
        if len(weakly_connected_components(g)) == 1:
            return g


def random_orthonormal_basis(rng, n, shift_kind="custom"):
    """Basis of a random symmetric matrix (distinct eigenvalues w.h.p.)."""
    m = rng.normal(size=(n, n))
    return eigendecompose((m + m.T) / 2, shift_kind=shift_kind)


def affine_adjacency_covariance(g, a=0.5, b=3.0):
    """a*A + b*I without the public constructor's definiteness gate."""
    adj = adjacency(g)
    return a * adj + b * np.eye(g.n)
