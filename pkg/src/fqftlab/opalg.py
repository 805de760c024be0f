"""Dense symmetric/positive operator algebra: block Schur composition and Cayley transforms.

Everything at this layer is a small dense real matrix (per-mode 2x2 blocks,
assembled block-diagonally into at most a few hundred rows), so plain
numpy/LAPACK calls suffice and all invariants are validated eagerly at
construction time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

SYMMETRY_ATOL = 1e-12
POSITIVITY_RTOL = 1e-12
CAYLEY_NORM_MARGIN = 1e-14
CONDITION_LIMIT = 1e12


class IllConditionedError(ValueError):
    """Middle block of a Schur composition is numerically singular."""


def _frozen_array(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SymMatrix:
    """Dense real symmetric matrix; symmetrized copy is stored read-only."""

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {arr.shape}")
        if arr.size and np.abs(arr - arr.T).max() > SYMMETRY_ATOL:
            raise ValueError("matrix is not symmetric within 1e-12")
        object.__setattr__(self, "entries", _frozen_array((arr + arr.T) / 2.0))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def array(self) -> np.ndarray:
        return self.entries

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.entries)

    def spectral_norm(self) -> float:
        return float(np.abs(self.eigenvalues()).max()) if self.dim else 0.0


@dataclass(frozen=True)
class CayleyForm:
    """Symmetric operator of spectral norm strictly below one.

    Inputs with norm >= 1 - 1e-14 are rejected rather than clamped; the
    closed-form Fock norms downstream require a strict contraction.
    """

    entries: SymMatrix

    def __post_init__(self):
        if not isinstance(self.entries, SymMatrix):
            object.__setattr__(self, "entries", SymMatrix(self.entries))
        norm = self.entries.spectral_norm()
        if norm >= 1.0 - CAYLEY_NORM_MARGIN:
            raise ValueError(f"Cayley form norm {norm} is not strictly below 1")

    @property
    def dim(self) -> int:
        return self.entries.dim

    @property
    def array(self) -> np.ndarray:
        return self.entries.array


@dataclass(frozen=True)
class BlockPosOp:
    """Positive operator on H_out (+) H_in stored as blocks [[a, b], [b^T, d]]."""

    a: SymMatrix
    b: np.ndarray
    d: SymMatrix

    def __post_init__(self):
        if not isinstance(self.a, SymMatrix):
            object.__setattr__(self, "a", SymMatrix(self.a))
        if not isinstance(self.d, SymMatrix):
            object.__setattr__(self, "d", SymMatrix(self.d))
        b = np.array(self.b, dtype=float)
        if b.ndim != 2 or b.shape != (self.a.dim, self.d.dim):
            raise ValueError(
                f"coupling block has shape {b.shape}, expected {(self.a.dim, self.d.dim)}"
            )
        object.__setattr__(self, "b", _frozen_array(b))
        lam = np.linalg.eigvalsh(self.assembled())
        if lam[-1] <= 0.0 or lam[0] <= -POSITIVITY_RTOL * lam[-1]:
            raise ValueError(
                f"assembled block operator is not positive definite (eigenvalues in [{lam[0]}, {lam[-1]}])"
            )

    @property
    def dim_out(self) -> int:
        return self.a.dim

    @property
    def dim_in(self) -> int:
        return self.d.dim

    def assembled(self) -> np.ndarray:
        top = np.hstack([self.a.array, self.b])
        bottom = np.hstack([self.b.T, self.d.array])
        return np.vstack([top, bottom])

    @classmethod
    def from_matrix(cls, matrix, dim_out: int) -> "BlockPosOp":
        arr = np.array(matrix, dtype=float)
        p = dim_out
        return cls(SymMatrix(arr[:p, :p]), arr[:p, p:], SymMatrix(arr[p:, p:]))

    @classmethod
    def identity(cls, dim_out: int, dim_in: int) -> "BlockPosOp":
        return cls(
            SymMatrix(np.eye(dim_out)),
            np.zeros((dim_out, dim_in)),
            SymMatrix(np.eye(dim_in)),
        )


def schur_compose(a2: BlockPosOp, a1: BlockPosOp) -> BlockPosOp:
    """Compose block positive operators through their shared middle space.

    With a1 = [[A, B], [B^T, D]] on H2(+)H1 and a2 = [[K, L], [L^T, M]] on
    H3(+)H2, the composite on H3(+)H1 is

        [[K - L(A+M)^{-1}L^T,    -L(A+M)^{-1}B],
         [-B^T(A+M)^{-1}L^T,  D - B^T(A+M)^{-1}B]].

    The middle solve uses a Cholesky factorization of A+M rather than an
    explicit inverse.
    """
    if a1.dim_out != a2.dim_in:
        raise ValueError(
            f"dimension mismatch: a1 maps into dim {a1.dim_out}, a2 expects dim {a2.dim_in}"
        )
    middle = a1.a.array + a2.d.array
    lam = np.linalg.eigvalsh(middle)
    if lam[0] <= 0.0 or lam[-1] / lam[0] > CONDITION_LIMIT:
        raise IllConditionedError(
            f"middle block A+M has condition estimate {lam[-1] / max(lam[0], 0.0):g}"
        )
    cho = scipy.linalg.cho_factor(middle, lower=True)
    l_blk = a2.b
    b_blk = a1.b
    k_new = a2.a.array - l_blk @ scipy.linalg.cho_solve(cho, l_blk.T)
    off = -(l_blk @ scipy.linalg.cho_solve(cho, b_blk))
    d_new = a1.d.array - b_blk.T @ scipy.linalg.cho_solve(cho, b_blk)
    return BlockPosOp(
        SymMatrix((k_new + k_new.T) / 2.0), off, SymMatrix((d_new + d_new.T) / 2.0)
    )


def _spectral_map(arr: np.ndarray, fn) -> np.ndarray:
    w, v = np.linalg.eigh(arr)
    out = (v * fn(w)) @ v.T
    return (out + out.T) / 2.0


def cayley(p: SymMatrix) -> CayleyForm:
    """Cayley transform P -> (I - P)(I + P)^{-1} of a positive definite matrix."""
    w = p.eigenvalues()
    if w.size and w[0] <= 0.0:
        raise ValueError(f"Cayley transform requires positive definite input (min eig {w[0]})")
    return CayleyForm(SymMatrix(_spectral_map(p.array, lambda t: (1.0 - t) / (1.0 + t))))


def cayley_inverse(c: CayleyForm) -> SymMatrix:
    """Inverse Cayley transform; the same rational map applied to a contraction."""
    return SymMatrix(_spectral_map(c.array, lambda t: (1.0 - t) / (1.0 + t)))


def logdet_pos(p: SymMatrix) -> float:
    """Log determinant of a positive definite symmetric matrix via Cholesky."""
    try:
        chol = np.linalg.cholesky(p.array)
    except np.linalg.LinAlgError as exc:
        raise ValueError("logdet_pos requires a positive definite matrix") from exc
    return float(2.0 * np.sum(np.log(np.diag(chol))))
