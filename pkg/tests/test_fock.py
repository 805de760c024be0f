import math

import numpy as np
import pytest

from fqftlab.fock import (
    FockVector,
    cocycle_constant,
    compose_hs,
    exp_vector,
    factorial_weights,
    fock_norm_sq,
    fock_pairing,
    log_cocycle_constant,
    multi_indices,
    vector_to_hs,
)
from fqftlab.opalg import BlockPosOp, CayleyForm, SymMatrix, cayley, schur_compose

from conftest import random_block_op, random_cayley


def orthonormal_gauge(t):
    """Rescale an operator matrix to orthonormal monomial bases."""
    wo = factorial_weights(t.out_dim, t.truncation_degree)
    wi = factorial_weights(t.in_dim, t.truncation_degree)
    return t.matrix * np.sqrt(wo)[:, None] / np.sqrt(wi)[None, :]


def test_multi_indices_graded_lex():
    idx = multi_indices(2, 2)
    assert idx == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))
    degrees = [sum(i) for i in idx]
    assert degrees == sorted(degrees)


def test_fock_vector_validation():
    with pytest.raises(ValueError):
        FockVector(2, 2, {(3, 0): 1.0})
    with pytest.raises(ValueError):
        FockVector(2, 2, {(1,): 1.0})
    with pytest.raises(ValueError):
        FockVector(1, -1, {})


def test_exp_vector_vacuum():
    zero = CayleyForm(SymMatrix(np.zeros((2, 2))))
    v = exp_vector(zero, 6)
    assert v.coefficients == {(0, 0): 1.0}


def test_exp_vector_one_dim_coefficients():
    a = 0.6
    v = exp_vector(CayleyForm(SymMatrix([[a]])), 12)
    for n in range(7):
        want = a**n / (2**n * math.factorial(n))
        assert v.coefficient((2 * n,)) == pytest.approx(want, rel=1e-14)
    assert all(sum(idx) % 2 == 0 for idx in v.coefficients)


def test_exp_vector_offdiagonal_two_dim():
    gamma = 0.45
    c = CayleyForm(SymMatrix([[0.0, gamma], [gamma, 0.0]]))
    v = exp_vector(c, 10)
    for idx, coef in v.coefficients.items():
        i, j = idx
        if i == j:
            assert coef == pytest.approx(gamma**i / math.factorial(i), rel=1e-14)
        else:
            assert coef == 0.0


def test_exp_vector_rejects_negative_truncation():
    with pytest.raises(ValueError):
        exp_vector(CayleyForm(SymMatrix([[0.1]])), -1)


def test_norm_closed_form_scalar():
    assert fock_norm_sq(CayleyForm(SymMatrix(np.zeros((3, 3))))) == pytest.approx(1.0)
    assert fock_norm_sq(CayleyForm(SymMatrix([[0.6]]))) == pytest.approx(1.25)


def test_norm_series_one_dim_matches_closed_form():
    # sum a^{2n} (2n)! / (2^{2n} (n!)^2) built from the monomial weights
    a = 0.55
    v = exp_vector(CayleyForm(SymMatrix([[a]])), 60)
    assert v.norm_sq() == pytest.approx((1 - a * a) ** -0.5, rel=1e-12)


def test_norm_matches_series_random(rng):
    for _ in range(10):
        c = random_cayley(rng, 3, max_norm=0.5)
        series = exp_vector(c, 24).norm_sq()
        assert fock_norm_sq(c) == pytest.approx(series, abs=1e-8, rel=1e-8)


def test_norm_truncation_tail_monotone(rng):
    c = random_cayley(rng, 2, max_norm=0.6)
    closed = fock_norm_sq(c)
    errs = [abs(exp_vector(c, d).norm_sq() - closed) for d in (8, 12, 16, 20, 24)]
    assert all(e2 <= e1 + 1e-15 for e1, e2 in zip(errs, errs[1:]))


def test_pairing_scalar_and_symmetry(rng):
    assert fock_pairing(
        CayleyForm(SymMatrix([[0.0]])), CayleyForm(SymMatrix([[0.0]]))
    ) == pytest.approx(1.0)
    a = CayleyForm(SymMatrix([[0.5]]))
    b = CayleyForm(SymMatrix([[-0.5]]))
    assert fock_pairing(a, b) == pytest.approx(1.25**-0.5)
    for _ in range(10):
        x, y = random_cayley(rng, 3), random_cayley(rng, 3)
        assert fock_pairing(x, y) == fock_pairing(y, x)


def test_pairing_matches_truncated_inner_product(rng):
    for _ in range(8):
        a = random_cayley(rng, 2, max_norm=0.5)
        b = random_cayley(rng, 2, max_norm=0.5)
        series = exp_vector(a, 24).inner(exp_vector(b, 24))
        assert fock_pairing(a, b) == pytest.approx(series, abs=1e-8, rel=1e-8)


def test_difference_norm_closed_form(rng):
    # ||E(A) - E(B)||^2 = det(1-A^2)^{-1/2} + det(1-B^2)^{-1/2} - 2 det(1-AB)^{-1/2}
    for _ in range(5):
        a = random_cayley(rng, 2, max_norm=0.4)
        b = random_cayley(rng, 2, max_norm=0.4)
        va, vb = exp_vector(a, 24), exp_vector(b, 24)
        diff = FockVector(
            2,
            24,
            {
                k: va.coefficient(k) - vb.coefficient(k)
                for k in set(va.coefficients) | set(vb.coefficients)
            },
        )
        closed = fock_norm_sq(a) + fock_norm_sq(b) - 2 * fock_pairing(a, b)
        assert diff.norm_sq() == pytest.approx(closed, abs=1e-9)


def test_exp_vector_continuity(rng):
    # ||E(A) - E(B)|| -> 0 with the Hilbert-Schmidt distance of the forms.
    a = random_cayley(rng, 2, max_norm=0.4)
    for eps in (1e-3, 1e-5):
        b = CayleyForm(SymMatrix(a.array + eps * np.eye(2)))
        dist_sq = fock_norm_sq(a) + fock_norm_sq(b) - 2 * fock_pairing(a, b)
        assert math.sqrt(max(dist_sq, 0.0)) < 10 * eps


def test_vector_to_hs_vacuum_and_diagonal():
    vac = exp_vector(CayleyForm(SymMatrix(np.zeros((2, 2)))), 6)
    t = vector_to_hs(vac, 1, 1)
    assert t.matrix[0, 0] == 1.0
    assert np.count_nonzero(t.matrix) == 1

    gamma = 0.35
    v = exp_vector(CayleyForm(SymMatrix([[0.0, gamma], [gamma, 0.0]])), 10)
    t = vector_to_hs(v, 1, 1)
    # kernel exp(gamma x y) with duality weight n! gives the diagonal x^n -> gamma^n x^n
    np.testing.assert_allclose(t.matrix, np.diag([gamma**n for n in range(11)]), atol=1e-15)


def test_vector_to_hs_rejects_bad_split():
    v = exp_vector(CayleyForm(SymMatrix(np.zeros((2, 2)))), 4)
    with pytest.raises(ValueError):
        vector_to_hs(v, 2, 1)


def test_compose_hs_diagonal_semigroup():
    def diag_op(gamma):
        v = exp_vector(CayleyForm(SymMatrix([[0.0, gamma], [gamma, 0.0]])), 12)
        return vector_to_hs(v, 1, 1)

    prod = compose_hs(diag_op(0.3), diag_op(0.5))
    np.testing.assert_allclose(
        prod.matrix, np.diag([0.15**n for n in range(13)]), atol=1e-15
    )


def test_compose_hs_identity_and_mismatch(rng):
    v = exp_vector(random_cayley(rng, 2, 0.3), 8)
    t = vector_to_hs(v, 1, 1)
    eye = np.eye(t.matrix.shape[0])
    ident = type(t)(1, 1, 8, eye)
    np.testing.assert_allclose(compose_hs(ident, t).matrix, t.matrix)
    with pytest.raises(ValueError):
        compose_hs(t, type(t)(2, 2, 8, np.eye(len(multi_indices(2, 8)))))


def test_cocycle_identity_blocks():
    ident = BlockPosOp.identity(1, 1)
    assert cocycle_constant(ident, ident) == pytest.approx(1.0, abs=1e-14)


def test_cocycle_cylinder_blocks_are_trivial():
    # det(alpha) = 1 and the norm ratio cancels det((A+M)/2)^{-1/2} exactly.
    for x1, x2 in [(0.4, 0.9), (1.5, 0.2)]:
        def blk(x):
            c, s = 1.0 / math.tanh(x), 1.0 / math.sinh(x)
            return BlockPosOp.from_matrix([[c, -s], [-s, c]], 1)

        assert log_cocycle_constant(blk(x2), blk(x1)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("dims", [(1, 1, 1), (2, 1, 2)])
def test_prop_44_brute_force(rng, dims):
    """Composition of Gaussian operators equals the cocycle times the composite's."""
    d3, d2, d1 = dims
    degree = 16
    for _ in range(4):
        a1 = random_block_op(rng, d2, d1, deviation=0.3)
        a2 = random_block_op(rng, d3, d2, deviation=0.3)
        t1 = vector_to_hs(exp_vector(cayley(SymMatrix(a1.assembled())), degree), d2, d1)
        t2 = vector_to_hs(exp_vector(cayley(SymMatrix(a2.assembled())), degree), d3, d2)
        lhs = orthonormal_gauge(compose_hs(t2, t1))
        comp = schur_compose(a2, a1)
        target = orthonormal_gauge(
            vector_to_hs(exp_vector(cayley(SymMatrix(comp.assembled())), degree), d3, d1)
        )
        c = cocycle_constant(a2, a1)
        rows = [i for i, idx in enumerate(multi_indices(d3, degree)) if sum(idx) <= 6]
        cols = [i for i, idx in enumerate(multi_indices(d1, degree)) if sum(idx) <= 6]
        lhs_block = lhs[np.ix_(rows, cols)]
        tgt_block = c * target[np.ix_(rows, cols)]
        rel = np.linalg.norm(lhs_block - tgt_block) / np.linalg.norm(tgt_block)
        assert rel <= 1e-6


def test_cocycle_positive(rng):
    for _ in range(10):
        a1 = random_block_op(rng, 2, 1, deviation=0.4)
        a2 = random_block_op(rng, 1, 2, deviation=0.4)
        assert cocycle_constant(a2, a1) > 0.0
