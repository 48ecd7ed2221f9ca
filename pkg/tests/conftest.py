import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20240521)


def random_spd(rng, p, ridge=1.0):
    G = rng.standard_normal((p, p))
    return G.T @ G + ridge * np.eye(p)


def random_instance(rng, n=20, p=5):
    """Correlated data, 0/1 weights with a few zeros, and an external point."""
    L = np.linalg.cholesky(random_spd(rng, p, 0.5))
    X = rng.standard_normal((n, p)) @ L.T
    w = np.ones(n)
    w[rng.choice(n, size=3, replace=False)] = 0.0
    x = rng.standard_normal(p) * 3.0
    return X, w, x
