"""Hermite polynomials, Gaussian quadrature, and the Bargmann transform.

This module exists to certify the Fock-space conventions from the outside:
the map that replaces monomials by probabilists' Hermite polynomials is an
isometry onto Gaussian L^2, the Bargmann transform sends h_n to z^n, and
kernel operators transported to the holomorphic side compose by contraction
against the complex Gaussian measure.  Nothing here feeds the production
amplitude path; it is an oracle layer only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import FockVector

MOMENT_RTOL = 1e-10
WEIGHT_SUM_ATOL = 1e-13


@dataclass(frozen=True)
class Polynomial1D:
    """Real polynomial by ascending powers; trailing coefficient nonzero (canonical)."""

    coeffs: tuple

    def __post_init__(self):
        c = [float(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        out = 0.0
        for c in reversed(self.coeffs):
            out = out * x + c
        return out


@lru_cache(maxsize=None)
def hermite(n: int) -> Polynomial1D:
    """Probabilists' Hermite polynomial h_n via h_{n+1} = x h_n - n h_{n-1}."""
    if n < 0:
        raise ValueError("Hermite degree must be nonnegative")
    if n == 0:
        return Polynomial1D((1.0,))
    if n == 1:
        return Polynomial1D((0.0, 1.0))
    prev, cur = hermite(n - 2), hermite(n - 1)
    shifted = (0.0,) + cur.coeffs
    out = list(shifted)
    for k, c in enumerate(prev.coeffs):
        out[k] -= (n - 1) * c
    return Polynomial1D(tuple(out))


@lru_cache(maxsize=None)
def hermite_coeff_matrix(n_max: int) -> np.ndarray:
    """Lower-triangular matrix M with M[n, k] = coefficient of x^k in h_n."""
    m = np.zeros((n_max + 1, n_max + 1))
    for n in range(n_max + 1):
        c = hermite(n).coeffs
        m[n, : len(c)] = c
    return m


def monomial_to_hermite(coeffs) -> np.ndarray:
    """Rewrite sum c_k x^k as sum a_n h_n by solving the triangular change of basis."""
    c = np.atleast_1d(np.asarray(coeffs, dtype=float))
    n_max = len(c) - 1
    return np.linalg.solve(hermite_coeff_matrix(n_max).T, c)


def q_map(v: FockVector) -> dict:
    """Replace each monomial x^alpha by prod_i h_{alpha_i}(x_i), expanded to monomials."""
    out: dict = {}
    d = v.base_dim
    for idx, coef in v.coefficients.items():
        terms = {tuple(0 for _ in range(d)): coef}
        for axis, power in enumerate(idx):
            if power == 0:
                continue
            h = hermite(power).coeffs
            new: dict = {}
            for mono, c in terms.items():
                for k, hk in enumerate(h):
                    if hk == 0.0:
                        continue
                    key = tuple(m + (k if ax == axis else 0) for ax, m in enumerate(mono))
                    new[key] = new.get(key, 0.0) + c * hk
            terms = new
        for key, c in terms.items():
            out[key] = out.get(key, 0.0) + c
    return {k: c for k, c in out.items() if c != 0.0}


def poly_nd_eval(p: dict, point) -> complex:
    pt = np.atleast_1d(np.asarray(point))
    total = 0.0 + 0.0j
    for idx, c in p.items():
        term = c
        for ax, power in enumerate(idx):
            if power:
                term = term * pt[ax] ** power
        total += term
    return total


def poly_nd_degree(p: dict) -> int:
    return max((sum(idx) for idx in p), default=0)


@dataclass(frozen=True)
class GaussQuadRule:
    """Nodes and weights integrating polynomials against the standard Gaussian on R."""

    nodes: np.ndarray
    weights: np.ndarray
    order: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.shape != weights.shape or nodes.ndim != 1 or len(nodes) != self.order:
            raise ValueError("nodes/weights must be 1-d arrays of length order")
        if np.any(weights <= 0.0):
            raise ValueError("quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > WEIGHT_SUM_ATOL:
            raise ValueError("weights do not sum to 1 against the Gaussian measure")
        for k in range(2, min(2 * self.order - 1, 40) + 1, 2):
            exact = float(math.prod(range(k - 1, 0, -2)))  # (k-1)!!
            got = float(np.sum(weights * nodes**k))
            if abs(got - exact) > MOMENT_RTOL * exact:
                raise ValueError(f"moment of degree {k} off by more than 1e-10 relative")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_order(cls, order: int) -> "GaussQuadRule":
        nodes, weights = np.polynomial.hermite_e.hermegauss(order)
        return cls(nodes, weights / weights.sum(), order)


def bargmann_transform(f, z, rule: GaussQuadRule) -> complex:
    """Sf(z) = e^{-<z,z>/2} Integral f(u) e^{<z,u>} dmu_n(u) by tensor quadrature.

    f is a Polynomial1D, a coefficient sequence, or a multivariate coefficient
    dict; z is a point in C^n with n matching f's arity.
    """
    if isinstance(f, Polynomial1D):
        poly = {(k,): c for k, c in enumerate(f.coeffs)}
    elif isinstance(f, dict):
        poly = f
    else:
        poly = {(k,): float(c) for k, c in enumerate(np.atleast_1d(np.asarray(f, dtype=float)))}
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = len(z)
    if any(len(idx) != n for idx in poly):
        raise ValueError("polynomial arity does not match the evaluation point")
    if rule.order < poly_nd_degree(poly) + 2:
        raise ValueError("insufficient quadrature order for the polynomial degree")
    grids = np.meshgrid(*([rule.nodes] * n), indexing="ij")
    weights = np.ones_like(grids[0])
    w = rule.weights
    for ax in range(n):
        shape = [1] * n
        shape[ax] = rule.order
        weights = weights * w.reshape(shape)
    phase = np.zeros_like(grids[0], dtype=complex)
    for ax in range(n):
        phase = phase + z[ax] * grids[ax]
    vals = np.zeros_like(grids[0], dtype=complex)
    for idx, c in poly.items():
        term = np.full_like(grids[0], c, dtype=complex)
        for ax, power in enumerate(idx):
            if power:
                term = term * grids[ax] ** power
        vals = vals + term
    integral = np.sum(weights * vals * np.exp(phase))
    return complex(np.exp(-0.5 * np.sum(z * z)) * integral)


def _physicists_rule(order: int):
    """Nodes/weights for the density pi^{-1/2} e^{-x^2}; used for the complex measure."""
    nodes, weights = np.polynomial.hermite.hermgauss(order)
    return nodes, weights / math.sqrt(math.pi)


def kernel_compose_check(kernel: dict, f: Polynomial1D, rule: GaussQuadRule, w_points=None) -> float:
    """Residual between the two routes of transporting a kernel operator to Bargmann space.

    kernel maps (y_degree, x_degree) -> coefficient for k(y, x) on R x R; f is a
    holomorphic polynomial in one variable z.  The direct route evaluates
    S(L_k(Q f)) at test points w through nested real Gaussian quadrature; the
    holomorphic route contracts the transported kernel K(w, conj(z)) against
    f(z) over the complex Gaussian measure.  Returns the max absolute
    difference over the test grid.
    """
    deg_y = max((a for a, _ in kernel), default=0)
    deg_x = max((b for _, b in kernel), default=0)
    if rule.order < max(deg_x, deg_y, f.degree) + 2:
        raise ValueError("insufficient quadrature order for the kernel degrees")
    if w_points is None:
        w_points = [0.0, 0.5, -0.7, 1.0 + 0.5j, -0.3 - 0.8j, 1.2j]

    # Q f: replace z^n by h_n to land in L^2 of the real Gaussian.
    qf_coeffs = np.zeros(f.degree + 1)
    for n_deg, c in enumerate(f.coeffs):
        h = hermite(n_deg).coeffs
        qf_coeffs[: len(h)] += c * np.asarray(h)
    qf = Polynomial1D(tuple(qf_coeffs))

    # Direct route: g(y) = Integral k(y,x) (Qf)(x) dmu(x), then S g at w.
    x_nodes, x_w = rule.nodes, rule.weights
    y_nodes, y_w = rule.nodes, rule.weights

    def k_eval(y, x):
        total = 0.0
        for (a, b), c in kernel.items():
            total += c * (y**a) * (x**b)
        return total

    g_on_nodes = np.array(
        [np.sum(x_w * k_eval(y, x_nodes) * qf(x_nodes)) for y in y_nodes]
    )
    lhs = np.array(
        [
            np.exp(-0.5 * w * w) * np.sum(y_w * g_on_nodes * np.exp(w * y_nodes))
            for w in np.asarray(w_points, dtype=complex)
        ]
    )

    # Holomorphic route: K(w, z) from the Hermite expansion of k, contracted
    # against f over the complex Gaussian (2-d real quadrature, variance 1/2).
    herm_k: dict = {}
    for (a, b), c in kernel.items():
        ay = monomial_to_hermite(np.eye(a + 1)[a])
        bx = monomial_to_hermite(np.eye(b + 1)[b])
        for i, ci in enumerate(ay):
            for j, cj in enumerate(bx):
                if ci * cj != 0.0:
                    herm_k[(i, j)] = herm_k.get((i, j), 0.0) + c * ci * cj

    nodes_c, w_c = _physicists_rule(rule.order)
    xi, eta = np.meshgrid(nodes_c, nodes_c, indexing="ij")
    wz = np.outer(w_c, w_c)
    z = xi + 1j * eta
    fz = np.zeros_like(z)
    for k_pow, c in enumerate(f.coeffs):
        fz = fz + c * z**k_pow
    rhs = []
    for w in np.asarray(w_points, dtype=complex):
        kw = np.zeros_like(z)
        for (i, j), c in herm_k.items():
            kw = kw + c * (w**i) * np.conj(z) ** j
        rhs.append(np.sum(wz * kw * fz))
    rhs = np.array(rhs)
    return float(np.abs(lhs - rhs).max())
