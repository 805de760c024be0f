import math

import numpy as np
import pytest

from fqftlab.opalg import (
    BlockPosOp,
    CayleyForm,
    IllConditionedError,
    SymMatrix,
    cayley,
    cayley_inverse,
    logdet_pos,
    schur_compose,
)

from conftest import random_block_op, random_spd


def test_sym_matrix_rejects_asymmetry():
    with pytest.raises(ValueError):
        SymMatrix([[0.0, 1.0], [1.0 + 1e-9, 0.0]])


def test_block_op_rejects_indefinite():
    with pytest.raises(ValueError):
        BlockPosOp.from_matrix([[1.0, 2.0], [2.0, 1.0]], 1)


def test_schur_identity_blocks():
    ident = BlockPosOp.identity(1, 1)
    comp = schur_compose(ident, ident)
    np.testing.assert_allclose(comp.assembled(), np.eye(2), atol=1e-15)


def test_schur_one_dim_blocks_frozen():
    a = BlockPosOp.from_matrix([[2.0, 1.0], [1.0, 2.0]], 1)
    comp = schur_compose(a, a)
    np.testing.assert_allclose(
        comp.assembled(), [[1.75, -0.25], [-0.25, 1.75]], atol=1e-15
    )


def test_schur_cylinder_mode_blocks_hyperbolic_addition():
    # omega [[coth, -csch], [-csch, coth]] composes by adding lengths:
    # sinh(a+b) = sinh a sinh b (coth a + coth b) makes the off-diagonal match.
    omega = 1.3
    for l1, l2 in [(0.4, 0.9), (2.0, 0.05), (5.0, 7.0)]:
        def blk(length):
            x = omega * length
            c, s = 1.0 / math.tanh(x), 1.0 / math.sinh(x)
            return BlockPosOp.from_matrix(omega * np.array([[c, -s], [-s, c]]), 1)

        comp = schur_compose(blk(l2), blk(l1))
        np.testing.assert_allclose(
            comp.assembled(), blk(l1 + l2).assembled(), rtol=0, atol=1e-12
        )


def test_schur_dimension_mismatch():
    a1 = random_block_op(np.random.default_rng(0), 2, 1)  # maps into dim 2
    a2 = random_block_op(np.random.default_rng(1), 2, 1)  # expects dim 1
    with pytest.raises(ValueError):
        schur_compose(a2, a1)


def test_schur_ill_conditioned_middle():
    # Middle block diag(1 + eps, 2 eps) has condition ~ 5e13 > 1e12.
    eps = 1e-14
    a1 = BlockPosOp.from_matrix(np.diag([1.0, eps, 1.0]), 2)
    a2 = BlockPosOp.from_matrix(np.diag([1.0, eps, eps]), 1)
    with pytest.raises(IllConditionedError):
        schur_compose(a2, a1)


def test_schur_associativity_random(rng):
    for _ in range(50):
        dims = rng.integers(1, 4, size=4)
        a1 = random_block_op(rng, dims[1], dims[0])
        a2 = random_block_op(rng, dims[2], dims[1])
        a3 = random_block_op(rng, dims[3], dims[2])
        left = schur_compose(a3, schur_compose(a2, a1))
        right = schur_compose(schur_compose(a3, a2), a1)
        np.testing.assert_allclose(
            left.assembled(), right.assembled(), rtol=0, atol=1e-10
        )


def test_schur_positivity_closure(rng):
    for _ in range(30):
        a1 = random_block_op(rng, 2, 2)
        a2 = random_block_op(rng, 1, 2)
        comp = schur_compose(a2, a1)  # constructor revalidates positivity
        assert np.linalg.eigvalsh(comp.assembled())[0] > 0


def test_cayley_identity_and_scalar():
    assert cayley(SymMatrix(np.eye(3))).array == pytest.approx(np.zeros((3, 3)))
    np.testing.assert_allclose(cayley(SymMatrix([[3.0]])).array, [[-0.5]])


def test_cayley_alpha_mode_block():
    # [[coth, -csch], [-csch, coth]](x) maps to e^{-x} times the swap matrix:
    # eigenvectors (1,1)/(1,-1) carry tanh(x/2) and coth(x/2).
    for x in (0.3, 1.0, 4.0):
        c, s = 1.0 / math.tanh(x), 1.0 / math.sinh(x)
        got = cayley(SymMatrix([[c, -s], [-s, c]])).array
        want = math.exp(-x) * np.array([[0.0, 1.0], [1.0, 0.0]])
        np.testing.assert_allclose(got, want, atol=1e-14)


def test_cayley_rejects_nonpositive():
    with pytest.raises(ValueError):
        cayley(SymMatrix([[0.0]]))
    with pytest.raises(ValueError):
        cayley(SymMatrix([[1.0, 0.0], [0.0, -0.5]]))


def test_cayley_form_rejects_norm_at_one():
    with pytest.raises(ValueError):
        CayleyForm(SymMatrix([[1.0]]))
    with pytest.raises(ValueError):
        CayleyForm(SymMatrix([[1.0 - 1e-15]]))
    CayleyForm(SymMatrix([[1.0 - 1e-13]]))  # just inside the margin


def test_cayley_inverse_frozen_values():
    np.testing.assert_allclose(cayley_inverse(CayleyForm(SymMatrix([[0.0]]))).array, [[1.0]])
    np.testing.assert_allclose(cayley_inverse(CayleyForm(SymMatrix([[-0.5]]))).array, [[3.0]])


def test_cayley_round_trips(rng):
    for _ in range(25):
        p = random_spd(rng, int(rng.integers(1, 5)))
        back = cayley_inverse(cayley(p))
        np.testing.assert_allclose(back.array, p.array, rtol=0, atol=1e-12)
    for _ in range(25):
        dim = int(rng.integers(1, 4))
        c = CayleyForm(SymMatrix(0.7 * _unit_norm_sym(rng, dim)))
        back = cayley(cayley_inverse(c))
        np.testing.assert_allclose(back.array, c.array, rtol=0, atol=1e-12)


def _unit_norm_sym(rng, dim):
    r = rng.standard_normal((dim, dim))
    r = (r + r.T) / 2.0
    return r / np.abs(np.linalg.eigvalsh(r)).max()


def test_cayley_monotone_continuity(rng):
    # ||C(P) - C(P')|| -> 0 linearly as ||P - P'|| -> 0 along a fixed direction.
    p = random_spd(rng, 3)
    base = cayley(p).array
    direction = _unit_norm_sym(rng, 3)
    prev_ratio = None
    for eps in (1e-2, 1e-4, 1e-6):
        pert = SymMatrix(p.array + eps * direction)
        diff = np.linalg.norm(cayley(pert).array - base)
        ratio = diff / eps
        assert ratio < 10.0
        if prev_ratio is not None:
            assert ratio == pytest.approx(prev_ratio, rel=0.05)
        prev_ratio = ratio


def test_logdet_pos_frozen_and_oracle(rng):
    assert logdet_pos(SymMatrix(np.eye(4))) == 0.0
    assert logdet_pos(SymMatrix(np.diag([2.0, 8.0]))) == pytest.approx(math.log(16.0))
    for _ in range(20):
        p = random_spd(rng, int(rng.integers(1, 6)))
        oracle = float(np.sum(np.log(np.linalg.eigvalsh(p.array))))
        assert logdet_pos(p) == pytest.approx(oracle, abs=1e-12)
    with pytest.raises(ValueError):
        logdet_pos(SymMatrix(np.diag([1.0, -2.0])))
