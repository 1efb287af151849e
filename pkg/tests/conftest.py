import numpy as np
import pytest

from approxdepth import oracle


def sandwich_violations(scene, Q, eps, lo, hi):
    """Number of queries breaking inner <= lo <= exact <= hi <= outer."""
    inn = oracle.inner_eps_depth(scene, Q, eps)
    ex = oracle.exact_depth(scene, Q)
    out = oracle.outer_eps_depth(scene, Q, eps)
    return int(((inn > lo) | (lo > ex) | (ex > hi) | (hi > out)).sum())


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
