"""Complexified symplectic linear algebra over the hyperbolic form.

Coordinate convention, fixed once and used everywhere: a doubled boundary
space H (+) H carries coordinates (value, momentum), and a linear relation
between doubled spaces W and V lives in W_C (+) conj(V_C) with coordinates
ordered as (outgoing value, outgoing momentum, incoming value, incoming
momentum).  Subspaces are canonicalized by orthonormalizing their bases;
equality is always tested through projectors or principal angles, never by
comparing bases.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .opalg import BlockPosOp

RANK_RTOL = 1e-10
ISOTROPY_ATOL = 1e-10
POSITIVITY_EIG_MIN = 1e-10
EQUALITY_TOL = 1e-8


@dataclass(frozen=True)
class HyperbolicSpace:
    """V = V+ (+) V- with V+ = V- = R^n and Omega((v1+,v1-),(v2+,v2-)) = <v1+,v2-> - <v2+,v1->."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("hyperbolic space needs n >= 1")

    @property
    def coord_dim(self) -> int:
        return 2 * self.n

    def form(self) -> np.ndarray:
        j = np.zeros((2 * self.n, 2 * self.n))
        j[: self.n, self.n :] = np.eye(self.n)
        j[self.n :, : self.n] = -np.eye(self.n)
        return j


def relation_form(w: HyperbolicSpace, v: HyperbolicSpace) -> np.ndarray:
    """Gram matrix of the symplectic form on W_C (+) conj(V_C), i.e. Omega_W (-) Omega_V."""
    dw, dv = w.coord_dim, v.coord_dim
    out = np.zeros((dw + dv, dw + dv))
    out[:dw, :dw] = w.form()
    out[dw:, dw:] = -v.form()
    return out


@dataclass(frozen=True)
class ComplexSubspace:
    """Subspace of C^ambient_dim, stored with an orthonormal basis in the columns."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        b = np.array(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != self.ambient_dim:
            raise ValueError(f"basis shape {b.shape} does not match ambient dim {self.ambient_dim}")
        if b.shape[1] == 0:
            raise ValueError("subspace needs at least one basis vector")
        u, s, _ = np.linalg.svd(b, full_matrices=False)
        if s[-1] <= RANK_RTOL * s[0]:
            raise ValueError("basis is not of full column rank")
        ortho = u[:, : b.shape[1]]
        ortho.setflags(write=False)
        object.__setattr__(self, "basis", ortho)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def is_lagrangian(l: ComplexSubspace, form: np.ndarray) -> bool:
    """Half-dimensional and isotropic for the (complex bilinear) form."""
    form = np.asarray(form)
    if form.shape[0] != l.ambient_dim:
        raise ValueError("form dimension does not match the subspace ambient dimension")
    if 2 * l.dim != l.ambient_dim:
        return False
    pairings = l.basis.T @ form @ l.basis
    return bool(np.abs(pairings).max() <= ISOTROPY_ATOL)


def is_positive_lagrangian(l: ComplexSubspace, form: np.ndarray) -> bool:
    """Positive definiteness of the Hermitian pairing -i*Omega(conj(v), w) on a Lagrangian."""
    if not is_lagrangian(l, form):
        raise ValueError("is_positive_lagrangian requires a Lagrangian subspace")
    gram = -1j * (l.basis.conj().T @ np.asarray(form) @ l.basis)
    gram = (gram + gram.conj().T) / 2.0
    return bool(np.linalg.eigvalsh(gram)[0] > POSITIVITY_EIG_MIN)


def compose_relations(q: ComplexSubspace, p: ComplexSubspace, w_coords: int) -> ComplexSubspace:
    """Fiber product of linear relations q in U(+)W and p in W(+)V over the shared W.

    The matched middle block spans the last w_coords coordinates of q and the
    first w_coords of p.  The result keeps whatever dimension the homogeneous
    solve produces; callers check it against the Lagrangian half-dimension
    instead of assuming transversality.
    """
    u_coords = q.ambient_dim - w_coords
    v_coords = p.ambient_dim - w_coords
    if u_coords < 0 or v_coords < 0:
        raise ValueError("middle dimension exceeds an ambient dimension")
    qw = q.basis[u_coords:, :]
    pw = p.basis[:w_coords, :]
    system = np.hstack([qw, -pw])
    _, s, vh = np.linalg.svd(system)
    tol = RANK_RTOL * (s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    null = vh[rank:, :].conj().T
    if null.shape[1] == 0:
        raise ValueError("fiber product is trivial: relations do not intersect over W")
    coeff_q = null[: q.dim, :]
    coeff_p = null[q.dim :, :]
    candidate = np.vstack([q.basis[:u_coords, :] @ coeff_q, p.basis[w_coords:, :] @ coeff_p])
    u, s, _ = np.linalg.svd(candidate, full_matrices=False)
    keep = int(np.sum(s > RANK_RTOL * s[0])) if s.size and s[0] > 0 else 0
    if keep == 0:
        raise ValueError("fiber product collapses to the zero subspace")
    return ComplexSubspace(u_coords + v_coords, u[:, :keep])


def graph_relation(t: np.ndarray) -> ComplexSubspace:
    """Graph {(T v, v)} of a linear map, as a relation into the first factor."""
    t = np.atleast_2d(np.asarray(t, dtype=complex))
    rows, cols = t.shape
    return ComplexSubspace(rows + cols, np.vstack([t, np.eye(cols)]))


def graph_of_tilde(a: BlockPosOp) -> ComplexSubspace:
    """Positive Lagrangian attached to a block positive operator.

    For a = [[A, B], [B^T, D]] the subspace collects, over x = (x_out, x_in),
    the vectors (x_out, i(A x_out + B x_in), x_in, -i(B^T x_out + D x_in)) in
    (H_out (+) H_out)_C (+) conj(H_in (+) H_in)_C: boundary values with +i
    times the transmitted momenta, the incoming momentum carried with the
    sign that makes gluing a plain coordinate match.
    """
    p, q = a.dim_out, a.dim_in
    basis = np.zeros((2 * p + 2 * q, p + q), dtype=complex)
    basis[:p, :p] = np.eye(p)
    basis[p : 2 * p, :p] = 1j * a.a.array
    basis[p : 2 * p, p:] = 1j * a.b
    basis[2 * p : 2 * p + q, p:] = np.eye(q)
    basis[2 * p + q :, :p] = -1j * a.b.T
    basis[2 * p + q :, p:] = -1j * a.d.array
    return ComplexSubspace(2 * p + 2 * q, basis)


def principal_angles(l1: ComplexSubspace, l2: ComplexSubspace) -> np.ndarray:
    """Principal angles, ascending; sine-based for small angles so that equality
    of subspaces reads as angles at roundoff level rather than sqrt(eps)."""
    if l1.ambient_dim != l2.ambient_dim:
        raise ValueError("subspaces live in different ambient spaces")
    cross = l1.basis.conj().T @ l2.basis
    cos_sv = np.sort(np.clip(np.linalg.svd(cross, compute_uv=False), 0.0, 1.0))[::-1]
    residual = l2.basis - l1.basis @ cross
    sin_sv = np.sort(np.clip(np.linalg.svd(residual, compute_uv=False), 0.0, 1.0))
    n = min(len(cos_sv), len(sin_sv))
    angles = [
        math.asin(sin_sv[i]) if cos_sv[i] ** 2 > 0.5 else math.acos(cos_sv[i])
        for i in range(n)
    ]
    return np.sort(np.array(angles))


def projector_distance(l1: ComplexSubspace, l2: ComplexSubspace) -> float:
    return float(np.linalg.norm(l1.projector() - l2.projector()))


def subspaces_equal(l1: ComplexSubspace, l2: ComplexSubspace, tol: float = EQUALITY_TOL) -> bool:
    if l1.dim != l2.dim:
        return False
    return projector_distance(l1, l2) < tol
