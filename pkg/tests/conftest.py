import numpy as np
import pytest

from fqftlab.opalg import BlockPosOp, CayleyForm, SymMatrix


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_symmetric(rng, dim, norm):
    """Random symmetric matrix rescaled to the requested spectral norm."""
    r = rng.standard_normal((dim, dim))
    r = (r + r.T) / 2.0
    top = np.abs(np.linalg.eigvalsh(r)).max()
    return r * (norm / top)


def random_block_op(rng, dim_out, dim_in, deviation=0.5):
    """Random positive block operator with ||A - I|| <= deviation."""
    n = dim_out + dim_in
    scale = deviation * rng.uniform(0.2, 1.0)
    return BlockPosOp.from_matrix(np.eye(n) + random_symmetric(rng, n, scale), dim_out)


def random_cayley(rng, dim, max_norm=0.5):
    return CayleyForm(SymMatrix(random_symmetric(rng, dim, max_norm * rng.uniform(0.3, 1.0))))


def random_spd(rng, dim, deviation=0.8):
    return SymMatrix(np.eye(dim) + random_symmetric(rng, dim, deviation * rng.uniform(0.1, 1.0)))
