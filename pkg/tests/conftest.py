import numpy as np
import pytest

from app.bdf_core import Leaf, Max, Min, leaf_count, random_expr
from app.config import make_params
from app.girg_sampler import GirgInstance, canonical_edges, power_law_weights

L1, L2, L3, L4, L5 = (Leaf(k) for k in range(1, 6))
MCD2 = Min(L1, L2)
MIN_OF_MINS = Max(Min(L1, L2), Min(L3, L4))
SCOM3 = Max(L1, Min(L2, L3))


@pytest.fixture
def gen():
    return np.random.default_rng(1234)


@pytest.fixture
def random_exprs():
    g = np.random.default_rng(99)
    return [random_expr(int(g.integers(1, 9)), g) for _ in range(30)]


def build_instance(n, edges, positions=None, bdf=L1, seed=0):
    """Hand-built instance; positions default to evenly spaced points on T^d."""
    d = leaf_count(bdf)
    if positions is None:
        positions = np.tile((np.arange(n) + 0.5)[:, None] / n, (1, d))
    return GirgInstance(
        params=make_params(n=n, seed=seed),
        bdf=bdf,
        weights=power_law_weights(n, 2.5),
        positions=np.asarray(positions, dtype=float).reshape(n, d),
        edges=canonical_edges(edges),
    )


@pytest.fixture
def instance_factory():
    return build_instance
