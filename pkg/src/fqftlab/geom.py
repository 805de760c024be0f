"""Two-dimensional bordism data: circles, flat cylinders, mode spectra, gluing.

Circles carry an optional flat-bundle holonomy given as rotation-block angles;
the trivial rank-1 bundle is the empty angle list.  All boundary operators are
diagonal in the real Fourier basis {1, sqrt(2) cos k t, sqrt(2) sin k t} (or
the twisted exponentials), so a cylinder's Dirichlet-to-Neumann operator is a
list of 2x2 blocks indexed by modes.  Hyperbolic functions are evaluated
through expm1 so that huge omega*L never overflows: coth -> 1 and csch -> 0
smoothly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Mapping

import numpy as np

from .opalg import BlockPosOp, SymMatrix

TWO_PI = 2.0 * math.pi


def coth(x: float) -> float:
    """coth(x) for x > 0 via (1 + e^{-2x}) / (1 - e^{-2x}), overflow-free."""
    if x <= 0.0:
        raise ValueError("coth requires a positive argument")
    em = math.expm1(-2.0 * x)
    return (2.0 + em) / (-em)


def csch(x: float) -> float:
    """csch(x) for x > 0 via 2 e^{-x} / (1 - e^{-2x}), overflow-free."""
    if x <= 0.0:
        raise ValueError("csch requires a positive argument")
    return 2.0 * math.exp(-x) / (-math.expm1(-2.0 * x))


@dataclass(frozen=True)
class TheoryConfig:
    """Mass, mode cutoff, and Fock truncation shared by a whole scene."""

    mass: float
    k_max: int
    truncation_degree: int

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.k_max < 1:
            raise ValueError("k_max must be at least 1")
        if self.truncation_degree < 1:
            raise ValueError("truncation_degree must be at least 1")


@dataclass(frozen=True)
class CircleObject:
    circumference: float
    holonomy_angles: tuple = ()

    def __post_init__(self):
        if self.circumference <= 0.0:
            raise ValueError("circumference must be positive")
        angles = tuple(float(a) % TWO_PI for a in self.holonomy_angles)
        object.__setattr__(self, "holonomy_angles", angles)

    @property
    def bundle_blocks(self) -> tuple:
        """Per-block twist angles; None marks the trivial rank-1 bundle."""
        return self.holonomy_angles if self.holonomy_angles else (None,)


@dataclass(frozen=True)
class CylinderMorphism:
    boundary: CircleObject
    length: float
    label: str = "cyl"
    in_port: str = ""
    out_port: str = ""

    def __post_init__(self):
        if self.length <= 0.0:
            raise ValueError("cylinder length must be positive")
        if not self.in_port:
            object.__setattr__(self, "in_port", f"{self.label}.in")
        if not self.out_port:
            object.__setattr__(self, "out_port", f"{self.label}.out")


@dataclass(frozen=True)
class Torus:
    """A fully traced cylinder: circle of circumference ell, total length L."""

    boundary: CircleObject
    length: float
    label: str = "torus"


@dataclass(frozen=True)
class Mode:
    """One Fourier mode: label k, block twist angle (None if trivial), frequency, multiplicity."""

    k: int
    omega: float
    multiplicity: int
    theta: float | None = None
    block: int = 0

    def __post_init__(self):
        if self.omega <= 0.0 or self.multiplicity not in (1, 2):
            raise ValueError("mode needs omega > 0 and multiplicity 1 or 2")


def mode_frequencies(y: CircleObject, cfg: TheoryConfig) -> tuple:
    """Mode spectrum of (Delta + m^2)^{1/2} on the circle, sorted by frequency.

    Trivial bundle: omega_k = sqrt((2 pi k / ell)^2 + m^2) for k = 0..k_max,
    multiplicity 2 for k >= 1 (cos and sin) and 1 for k = 0.  Each holonomy
    angle theta contributes the twisted ladder k = -k_max..k_max with
    omega = sqrt((2 pi (k + theta/2pi)/ell)^2 + m^2), multiplicity 1.
    """
    ell, m = y.circumference, cfg.mass
    modes = []
    if not y.holonomy_angles:
        for k in range(cfg.k_max + 1):
            omega = math.hypot(TWO_PI * k / ell, m)
            modes.append(Mode(k, omega, 2 if k else 1, None, 0))
    else:
        for block, theta in enumerate(y.holonomy_angles):
            beta = theta / TWO_PI
            for k in range(-cfg.k_max, cfg.k_max + 1):
                omega = math.hypot(TWO_PI * (k + beta) / ell, m)
                modes.append(Mode(k, omega, 1, theta, block))
    modes.sort(key=lambda md: (md.omega, md.block, md.k))
    return tuple(modes)


def dtn_block(omega: float, length: float) -> np.ndarray:
    """2x2 Dirichlet-to-Neumann block omega [[coth, -csch], [-csch, coth]](omega L)."""
    x = omega * length
    c, s = coth(x), csch(x)
    return omega * np.array([[c, -s], [-s, c]])


def alpha_block(omega: float, length: float) -> np.ndarray:
    """DtN block normalized by (Delta + m^2)^{-1/2}: drops the omega prefactor."""
    x = omega * length
    c, s = coth(x), csch(x)
    return np.array([[c, -s], [-s, c]])


def _as_block_pos_op(block: np.ndarray) -> BlockPosOp:
    return BlockPosOp(SymMatrix(block[:1, :1]), block[:1, 1:], SymMatrix(block[1:, 1:]))


def dtn_cylinder(c: CylinderMorphism, cfg: TheoryConfig) -> tuple:
    """Per-mode DtN blocks of a flat cylinder as (Mode, BlockPosOp) pairs."""
    return tuple(
        (md, _as_block_pos_op(dtn_block(md.omega, c.length)))
        for md in mode_frequencies(c.boundary, cfg)
    )


def alpha_cylinder(c: CylinderMorphism, cfg: TheoryConfig) -> tuple:
    """Per-mode normalized boundary operators; deviation from I decays like 2 e^{-omega L}."""
    return tuple(
        (md, _as_block_pos_op(alpha_block(md.omega, c.length)))
        for md in mode_frequencies(c.boundary, cfg)
    )


@dataclass(frozen=True)
class BordismScene:
    """Circles, cylinders, and out-to-in port wiring; tori appear after gluing."""

    theory: TheoryConfig
    circles: Mapping[str, CircleObject]
    cylinders: Mapping[str, CylinderMorphism]
    wiring: tuple = ()
    tori: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "circles", dict(self.circles))
        object.__setattr__(self, "cylinders", dict(self.cylinders))
        object.__setattr__(self, "wiring", tuple((str(a), str(b)) for a, b in self.wiring))
        out_ports = {c.out_port: name for name, c in self.cylinders.items()}
        in_ports = {c.in_port: name for name, c in self.cylinders.items()}
        seen_from, seen_to = set(), set()
        for frm, to in self.wiring:
            if frm not in out_ports:
                raise ValueError(f"wiring source {frm!r} is not an out-port")
            if to not in in_ports:
                raise ValueError(f"wiring target {to!r} is not an in-port")
            if frm in seen_from or to in seen_to:
                raise ValueError(f"port used twice in wiring: {frm!r} -> {to!r}")
            seen_from.add(frm)
            seen_to.add(to)
            c_from = self.cylinders[out_ports[frm]]
            c_to = self.cylinders[in_ports[to]]
            if c_from.boundary != c_to.boundary:
                raise ValueError(
                    f"wired circles are not isometric at {frm!r} -> {to!r}"
                )

    def free_ports(self) -> tuple:
        wired_out = {frm for frm, _ in self.wiring}
        wired_in = {to for _, to in self.wiring}
        free = []
        for c in self.cylinders.values():
            if c.out_port not in wired_out:
                free.append(c.out_port)
            if c.in_port not in wired_in:
                free.append(c.in_port)
        return tuple(sorted(free))


def glue(scene: BordismScene) -> BordismScene:
    """Merge wired cylinder chains into single cylinders; closed loops become tori.

    Chains add lengths (the per-mode gluing identity makes this exact), and a
    cylinder chain wired back onto itself is recorded as a torus with the
    chain's total length.
    """
    succ: dict = {}
    for frm, to in scene.wiring:
        src = next(n for n, c in scene.cylinders.items() if c.out_port == frm)
        dst = next(n for n, c in scene.cylinders.items() if c.in_port == to)
        succ[src] = dst
    has_pred = set(succ.values())

    merged: dict = {}
    tori = list(scene.tori)
    visited: set = set()
    for name in scene.cylinders:
        if name in visited or name in has_pred:
            continue
        chain = [name]
        visited.add(name)
        while chain[-1] in succ:
            nxt = succ[chain[-1]]
            chain.append(nxt)
            visited.add(nxt)
        total = sum(scene.cylinders[n].length for n in chain)
        first, last = scene.cylinders[chain[0]], scene.cylinders[chain[-1]]
        label = "+".join(chain)
        merged[label] = CylinderMorphism(
            first.boundary, total, label, in_port=first.in_port, out_port=last.out_port
        )
    for name in scene.cylinders:
        if name in visited:
            continue
        # remaining nodes sit on cycles: pure traces
        cycle = [name]
        visited.add(name)
        cur = succ[name]
        while cur != name:
            cycle.append(cur)
            visited.add(cur)
            cur = succ[cur]
        total = sum(scene.cylinders[n].length for n in cycle)
        tori.append(Torus(scene.cylinders[name].boundary, total, "+".join(cycle)))
    return BordismScene(scene.theory, scene.circles, merged, (), tuple(tori))
