"""Truncated bosonic Fock spaces over R^d in the monomial basis.

Vectors are stored as coefficient maps over multi-indices alpha with the
monomial normalization ||x^alpha||^2 = prod_i alpha_i!.  In that gauge the
Gaussian vector attached to a symmetric contraction C is literally the
polynomial exp(x^T C x / 2) truncated by total degree, its squared norm has
the closed form det(I - C^2)^{-1/2}, and the pairing of two such vectors is
det(I - C1 C2)^{-1/2}.  The vector<->operator identification carries the
duality weight prod (alpha_in)_i! so that operator composition is plain
matrix multiplication over the middle multi-index basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .opalg import BlockPosOp, CayleyForm, SymMatrix, cayley, logdet_pos, schur_compose


@lru_cache(maxsize=None)
def multi_indices(dim: int, max_degree: int) -> tuple[tuple[int, ...], ...]:
    """All exponent tuples of length dim with total degree <= max_degree, graded lex."""
    if dim < 0 or max_degree < 0:
        raise ValueError("dim and max_degree must be nonnegative")
    if dim == 0:
        return ((),)

    def fixed_degree(d: int, total: int):
        if d == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for rest in fixed_degree(d - 1, total - head):
                yield (head,) + rest

    out = []
    for degree in range(max_degree + 1):
        out.extend(fixed_degree(dim, degree))
    return tuple(out)


@lru_cache(maxsize=None)
def index_positions(dim: int, max_degree: int) -> dict:
    return {idx: pos for pos, idx in enumerate(multi_indices(dim, max_degree))}


@lru_cache(maxsize=None)
def factorial_weights(dim: int, max_degree: int) -> np.ndarray:
    """prod_i alpha_i! aligned with multi_indices(dim, max_degree)."""
    return np.array(
        [math.prod(math.factorial(a) for a in idx) for idx in multi_indices(dim, max_degree)],
        dtype=float,
    )


@dataclass(frozen=True)
class FockVector:
    """Truncated element of Sym^* (R^d)^v in the monomial coefficient gauge."""

    base_dim: int
    truncation_degree: int
    coefficients: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.truncation_degree < 0:
            raise ValueError("truncation_degree must be nonnegative")
        for idx in self.coefficients:
            if len(idx) != self.base_dim or any(a < 0 for a in idx):
                raise ValueError(f"bad multi-index {idx} for base dimension {self.base_dim}")
            if sum(idx) > self.truncation_degree:
                raise ValueError(f"multi-index {idx} exceeds truncation degree")

    def coefficient(self, idx: tuple[int, ...]) -> float:
        return self.coefficients.get(tuple(idx), 0.0)

    def norm_sq(self) -> float:
        return math.fsum(
            c * c * math.prod(math.factorial(a) for a in idx)
            for idx, c in self.coefficients.items()
        )

    def inner(self, other: "FockVector") -> float:
        if self.base_dim != other.base_dim:
            raise ValueError("base dimensions differ")
        small, large = self.coefficients, other.coefficients
        if len(large) < len(small):
            small, large = large, small
        return math.fsum(
            c * large[idx] * math.prod(math.factorial(a) for a in idx)
            for idx, c in small.items()
            if idx in large
        )


def _poly_mul(a: dict, b: dict, max_degree: int) -> dict:
    out: dict = {}
    for ia, ca in a.items():
        da = sum(ia)
        for ib, cb in b.items():
            if da + sum(ib) > max_degree:
                continue
            key = tuple(x + y for x, y in zip(ia, ib))
            out[key] = out.get(key, 0.0) + ca * cb
    return out


def _quadratic_half_form(c: CayleyForm) -> dict:
    """Coefficients of x^T C x / 2 as a polynomial: C_ii/2 on x_i^2, C_ij on x_i x_j."""
    arr = c.array
    d = c.dim
    out: dict = {}
    for i in range(d):
        if arr[i, i] != 0.0:
            idx = tuple(2 if k == i else 0 for k in range(d))
            out[idx] = arr[i, i] / 2.0
        for j in range(i + 1, d):
            if arr[i, j] != 0.0:
                idx = tuple(1 if k in (i, j) else 0 for k in range(d))
                out[idx] = arr[i, j]
    return out


def exp_vector(c: CayleyForm, truncation_degree: int) -> FockVector:
    """Gaussian vector exp(x^T C x / 2) through total degree truncation_degree."""
    if truncation_degree < 0:
        raise ValueError("truncation_degree must be nonnegative")
    d = c.dim
    quad = _quadratic_half_form(c)
    empty = tuple(0 for _ in range(d))
    acc = {empty: 1.0}
    term = {empty: 1.0}
    for n in range(1, truncation_degree // 2 + 1):
        term = _poly_mul(term, quad, truncation_degree)
        term = {k: v / n for k, v in term.items()}
        if not term:
            break
        for k, v in term.items():
            acc[k] = acc.get(k, 0.0) + v
    return FockVector(d, truncation_degree, acc)


def _logdet_one_minus_product(a: np.ndarray, b: np.ndarray) -> float:
    eye = np.eye(a.shape[0])
    sign1, ld1 = np.linalg.slogdet(eye - a @ b)
    sign2, ld2 = np.linalg.slogdet(eye - b @ a)
    if sign1 <= 0 or sign2 <= 0:
        raise ValueError("I - AB is not positive; contraction bound violated")
    return 0.5 * (ld1 + ld2)


def log_fock_norm_sq(c: CayleyForm) -> float:
    """log ||E(C)||^2 = -1/2 log det(I - C^2), exact in log space."""
    return -0.5 * _logdet_one_minus_product(c.array, c.array)


def fock_norm_sq(c: CayleyForm) -> float:
    """Closed-form squared norm det(I - C^2)^{-1/2} of the Gaussian vector."""
    return math.exp(log_fock_norm_sq(c))


def fock_pairing(a: CayleyForm, b: CayleyForm) -> float:
    """Closed-form pairing det(I - AB)^{-1/2}; symmetrized so pairing(a,b) == pairing(b,a)."""
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return math.exp(-0.5 * _logdet_one_minus_product(a.array, b.array))


@dataclass(frozen=True)
class HSOperatorTrunc:
    """Truncated operator between monomial coefficient bases (rows: out, cols: in)."""

    out_dim: int
    in_dim: int
    truncation_degree: int
    matrix: np.ndarray

    def __post_init__(self):
        rows = len(multi_indices(self.out_dim, self.truncation_degree))
        cols = len(multi_indices(self.in_dim, self.truncation_degree))
        m = np.array(self.matrix, dtype=float)
        if m.shape != (rows, cols):
            raise ValueError(f"matrix shape {m.shape} does not match bases {(rows, cols)}")
        if not np.isfinite(m).all():
            raise ValueError("operator matrix has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def out_indices(self) -> tuple:
        return multi_indices(self.out_dim, self.truncation_degree)

    @property
    def in_indices(self) -> tuple:
        return multi_indices(self.in_dim, self.truncation_degree)


def vector_to_hs(v: FockVector, out_dim: int, in_dim: int) -> HSOperatorTrunc:
    """Identify a vector on H_out (+) H_in with an operator Sym^* H_in^v -> Sym^* H_out^v.

    Each multi-index splits as (alpha_out, alpha_in) over the declared basis
    split, and the entry carries the duality weight prod (alpha_in)_i!, which
    makes composition of the resulting matrices agree with contraction
    against the middle inner product.
    """
    if out_dim + in_dim != v.base_dim:
        raise ValueError("basis split does not match the vector's base dimension")
    d = v.truncation_degree
    rows = index_positions(out_dim, d)
    cols = index_positions(in_dim, d)
    m = np.zeros((len(rows), len(cols)))
    for idx, coef in v.coefficients.items():
        a_out, a_in = idx[:out_dim], idx[out_dim:]
        weight = math.prod(math.factorial(a) for a in a_in)
        m[rows[a_out], cols[a_in]] = coef * weight
    return HSOperatorTrunc(out_dim, in_dim, d, m)


def compose_hs(t2: HSOperatorTrunc, t1: HSOperatorTrunc) -> HSOperatorTrunc:
    if t1.out_dim != t2.in_dim or t1.truncation_degree != t2.truncation_degree:
        raise ValueError("operators are not composable: middle basis mismatch")
    return HSOperatorTrunc(
        t2.out_dim, t1.in_dim, t1.truncation_degree, t2.matrix @ t1.matrix
    )


def log_cocycle_constant(a2: BlockPosOp, a1: BlockPosOp) -> float:
    """log of the scalar relating composed Gaussian operators to the composite's.

    log c = 1/4 (logdet a1 + logdet a2 - logdet (a2 o a1)) - 1/2 logdet((A+M)/2)
            + log||E(C(a1))|| + log||E(C(a2))|| - log||E(C(a2 o a1))||,
    where A+M is the middle block of the Schur composition.
    """
    comp = schur_compose(a2, a1)
    middle = SymMatrix((a1.a.array + a2.d.array) / 2.0)
    det_part = 0.25 * (
        logdet_pos(SymMatrix(a1.assembled()))
        + logdet_pos(SymMatrix(a2.assembled()))
        - logdet_pos(SymMatrix(comp.assembled()))
    ) - 0.5 * logdet_pos(middle)
    norm_part = 0.5 * (
        log_fock_norm_sq(cayley(SymMatrix(a1.assembled())))
        + log_fock_norm_sq(cayley(SymMatrix(a2.assembled())))
        - log_fock_norm_sq(cayley(SymMatrix(comp.assembled())))
    )
    return det_part + norm_part


def cocycle_constant(a2: BlockPosOp, a1: BlockPosOp) -> float:
    """The strictly positive scalar c(a2, a1); see log_cocycle_constant."""
    return math.exp(log_cocycle_constant(a2, a1))
