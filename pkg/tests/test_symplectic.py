import numpy as np
import pytest

from fqftlab.opalg import BlockPosOp, schur_compose
from fqftlab.symplectic import (
    ComplexSubspace,
    HyperbolicSpace,
    compose_relations,
    graph_of_tilde,
    graph_relation,
    is_lagrangian,
    is_positive_lagrangian,
    principal_angles,
    projector_distance,
    relation_form,
    subspaces_equal,
)

from conftest import random_block_op


def test_hyperbolic_form_antisymmetric_nondegenerate():
    for n in (1, 2, 3):
        j = HyperbolicSpace(n).form()
        assert np.allclose(j, -j.T)
        assert np.linalg.matrix_rank(j) == 2 * n


def test_graph_of_i_identity_is_lagrangian():
    # graph of i*1 in (value, momentum) ordering: {(x, i x)}
    space = HyperbolicSpace(1)
    l = ComplexSubspace(2, np.array([[1.0], [1j]]))
    assert is_lagrangian(l, space.form())
    assert is_positive_lagrangian(l, space.form())


def test_vertical_subspace_is_lagrangian_not_positive():
    space = HyperbolicSpace(2)
    basis = np.zeros((4, 2), dtype=complex)
    basis[0, 0] = 1.0
    basis[1, 1] = 1.0
    vertical = ComplexSubspace(4, basis)
    assert is_lagrangian(vertical, space.form())
    gram = -1j * (vertical.basis.conj().T @ space.form() @ vertical.basis)
    assert np.abs(gram).max() < 1e-12  # degenerate, hence not positive
    assert not is_positive_lagrangian(vertical, space.form())


def test_non_isotropic_plane_fails():
    # span{(1,0,0,0), (0,0,1,0)} in the 2-dim hyperbolic space pairs value
    # against value: isotropic. span{(1,0,0,0),(0,1,0,0)} inside dim-1 ambient
    # has the wrong dimension. The genuinely non-isotropic case:
    space = HyperbolicSpace(2)
    basis = np.zeros((4, 2), dtype=complex)
    basis[0, 0] = 1.0  # value_1
    basis[2, 1] = 1.0  # momentum_1: Omega(e_val, e_mom) = 1 != 0
    assert not is_lagrangian(ComplexSubspace(4, basis), space.form())


def test_graph_of_ia_positive_and_sign_flip(rng):
    for _ in range(10):
        n = int(rng.integers(1, 4))
        a = rng.standard_normal((n, n))
        a = a @ a.T + 0.3 * np.eye(n)  # positive definite
        space = HyperbolicSpace(n)
        plus = ComplexSubspace(2 * n, np.vstack([np.eye(n), 1j * a]))
        minus = ComplexSubspace(2 * n, np.vstack([np.eye(n), -1j * a]))
        assert is_positive_lagrangian(plus, space.form())
        assert not is_positive_lagrangian(minus, space.form())


def test_graph_of_indefinite_fails():
    space = HyperbolicSpace(2)
    a = np.diag([1.0, -1.0])
    l = ComplexSubspace(4, np.vstack([np.eye(2), 1j * a]))
    assert is_lagrangian(l, space.form())
    assert not is_positive_lagrangian(l, space.form())


def test_positive_lagrangian_rejects_non_lagrangian():
    space = HyperbolicSpace(2)
    basis = np.zeros((4, 2), dtype=complex)
    basis[0, 0] = 1.0
    basis[2, 1] = 1.0  # spans a (value, momentum) pair: Omega = 1
    with pytest.raises(ValueError):
        is_positive_lagrangian(ComplexSubspace(4, basis), space.form())


def test_compose_with_identity_graph(rng):
    t = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    rel = graph_relation(t)
    ident = graph_relation(np.eye(2, dtype=complex))
    composed = compose_relations(ident, rel, 2)
    assert subspaces_equal(composed, rel)


def test_compose_graphs_multiply(rng):
    for _ in range(10):
        s = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        t = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        q = graph_relation(s)  # W -> U
        p = graph_relation(t)  # V -> W
        composed = compose_relations(q, p, 2)
        assert subspaces_equal(composed, graph_relation(s @ t))


def test_graph_of_tilde_identity_block():
    a = BlockPosOp.identity(1, 1)
    sub = graph_of_tilde(a)
    # {(x2, i x2, x1, -i x1)}: the graph of i diag(1, -1) in the paper's ordering
    want = ComplexSubspace(
        4,
        np.array(
            [[1.0, 0.0], [1j, 0.0], [0.0, 1.0], [0.0, -1j]]
        ),
    )
    assert subspaces_equal(sub, want)


def test_graph_of_tilde_positive(rng):
    form = None
    for _ in range(30):
        p, q = int(rng.integers(1, 3)), int(rng.integers(1, 3))
        a = random_block_op(rng, p, q)
        sub = graph_of_tilde(a)
        form = relation_form(HyperbolicSpace(p), HyperbolicSpace(q))
        assert is_positive_lagrangian(sub, form)


def test_composition_of_positive_lagrangians_is_positive(rng):
    for _ in range(50):
        d1, d2, d3 = (int(rng.integers(1, 3)) for _ in range(3))
        a1 = random_block_op(rng, d2, d1)
        a2 = random_block_op(rng, d3, d2)
        l1 = graph_of_tilde(a1)
        l2 = graph_of_tilde(a2)
        composed = compose_relations(l2, l1, 2 * d2)
        assert composed.dim == d3 + d1  # no dimension drop in the positive case
        form = relation_form(HyperbolicSpace(d3), HyperbolicSpace(d1))
        assert is_positive_lagrangian(composed, form)


def test_composition_matches_schur_graph(rng):
    for _ in range(30):
        d1, d2, d3 = (int(rng.integers(1, 3)) for _ in range(3))
        a1 = random_block_op(rng, d2, d1)
        a2 = random_block_op(rng, d3, d2)
        composed = compose_relations(graph_of_tilde(a2), graph_of_tilde(a1), 2 * d2)
        direct = graph_of_tilde(schur_compose(a2, a1))
        assert principal_angles(composed, direct).max() < 1e-8
        assert projector_distance(composed, direct) < 1e-8


def test_subspace_equality_is_basis_free(rng):
    basis = rng.standard_normal((4, 2)) + 1j * rng.standard_normal((4, 2))
    mix = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    l1 = ComplexSubspace(4, basis)
    l2 = ComplexSubspace(4, basis @ (mix + 2 * np.eye(2)))
    assert subspaces_equal(l1, l2)


def test_compose_dimension_mismatch():
    l1 = graph_relation(np.eye(2, dtype=complex))
    l2 = graph_relation(np.eye(3, dtype=complex))
    with pytest.raises(ValueError):
        compose_relations(l2, l1, 5)
