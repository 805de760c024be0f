"""Amplitudes of flat cylinders, their composition, traces, and the verification harness.

An amplitude is a log prefactor plus one 2x2 Cayley block per boundary mode;
for a cylinder of length L the block is exactly e^{-omega L} times the swap
matrix.  Composition never materializes truncated Fock operators: blocks are
pulled back through the inverse Cayley transform, Schur-composed, and
re-transformed, while the prefactor picks up the per-mode cocycle scalars.
The truncated Fock representation appears only inside verification, as the
measurement side of the projective-scalar identity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .fock import (
    exp_vector,
    log_cocycle_constant,
    log_fock_norm_sq,
    vector_to_hs,
)
from .geom import (
    BordismScene,
    CircleObject,
    CylinderMorphism,
    Mode,
    TheoryConfig,
    Torus,
    alpha_block,
    glue,
    mode_frequencies,
)
from .opalg import BlockPosOp, CayleyForm, SymMatrix, cayley, cayley_inverse, schur_compose
from . import zeta

BLOCK_DECAY_CUTOFF = 1e-16
SWAP = np.array([[0.0, 1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class StateSpace:
    """Descriptor of E(Y): the circle data with its truncated mode spectrum."""

    circles: tuple
    spectrum: tuple
    truncation_degree: int

    @property
    def is_scalar(self) -> bool:
        return not self.circles


def state_space(y: CircleObject | None, cfg: TheoryConfig) -> StateSpace:
    """State space of one circle; None gives the scalar space of the empty object."""
    if y is None:
        return StateSpace((), (), cfg.truncation_degree)
    return StateSpace((y,), mode_frequencies(y, cfg), cfg.truncation_degree)


def state_space_union(*spaces: StateSpace) -> StateSpace:
    circles = tuple(c for sp in spaces for c in sp.circles)
    spectrum = tuple(md for sp in spaces for md in sp.spectrum)
    degree = max((sp.truncation_degree for sp in spaces), default=0)
    return StateSpace(circles, spectrum, degree)


@dataclass(frozen=True)
class Amplitude:
    """Cylinder amplitude: log prefactor plus per-mode Cayley blocks (rows: out, in)."""

    circle: CircleObject
    config: TheoryConfig
    length: float
    blocks: tuple  # ((Mode, CayleyForm), ...)
    log_prefactor: float
    projective: bool
    error_estimate: float
    out_port: str = "out"
    in_port: str = "in"

    def __post_init__(self):
        if not math.isfinite(self.log_prefactor):
            raise ValueError("log prefactor must be finite")
        for _, blk in self.blocks:
            if blk.dim != 2:
                raise ValueError("amplitude blocks must be 2x2 Cayley forms")

    def block_map(self) -> dict:
        return {(md.block, md.k): (md, blk) for md, blk in self.blocks}

    def block_at(self, mode: Mode) -> CayleyForm:
        """Stored block, or the exact e^{-omega L} swap block past the stored cutoff."""
        stored = self.block_map().get((mode.block, mode.k))
        if stored is not None:
            return stored[1]
        return CayleyForm(SymMatrix(math.exp(-mode.omega * self.length) * SWAP))


def _adaptive_k(y: CircleObject, cfg: TheoryConfig, length: float) -> int:
    """Smallest cutoff with e^{-omega L} below the decay threshold, floored at cfg.k_max."""
    target = -math.log(BLOCK_DECAY_CUTOFF) / length
    if target <= cfg.mass:
        k_needed = 1
    else:
        xi = math.sqrt(target**2 - cfg.mass**2)
        k_needed = int(math.ceil(y.circumference * xi / (2.0 * math.pi))) + 1
    return max(cfg.k_max, k_needed)


def _zeta_prefactor(y: CircleObject, length: float, m: float):
    """Summed log det pieces over the circle's bundle blocks, with error bound."""
    log_d = 0.0
    log_t = 0.0
    err = 0.0
    for theta in y.bundle_blocks:
        th = 0.0 if theta is None else theta
        d = zeta.logdet_cylinder_dirichlet(y.circumference, length, m, th)
        t = zeta.logdet_2dtn_cylinder(y.circumference, length, m, th)
        log_d += d.value
        log_t += t.value
        err += d.error_estimate + t.error_estimate
    return log_d, log_t, err


def amplitude(c: CylinderMorphism, cfg: TheoryConfig, projective: bool = False) -> Amplitude:
    """Amplitude of a flat cylinder.

    Blocks are exactly e^{-omega L} times the swap matrix.  With zeta
    prefactors on, log_prefactor = -1/2 logdet(Dirichlet cylinder)
    - 1/4 logdet(doubled boundary operator) + 1/2 sum_modes mult log(1-q^2),
    the last term folding the Gaussian-vector normalization into the scalar.
    In projective mode the amplitude is the raw exponential vector:
    log_prefactor = 0.
    """
    y = c.boundary
    k_used = _adaptive_k(y, cfg, c.length)
    spectrum = mode_frequencies(y, replace(cfg, k_max=k_used))
    blocks = []
    norm_part = 0.0
    for md in spectrum:
        q = math.exp(-md.omega * c.length)
        blocks.append((md, CayleyForm(SymMatrix(q * SWAP))))
        norm_part += md.multiplicity * math.log1p(-q * q)
    if projective:
        lp, err = 0.0, BLOCK_DECAY_CUTOFF
    else:
        log_d, log_t, err = _zeta_prefactor(y, c.length, cfg.mass)
        lp = -0.5 * log_d - 0.25 * log_t + 0.5 * norm_part
        err += BLOCK_DECAY_CUTOFF
    return Amplitude(
        y, cfg, c.length, tuple(blocks), lp, projective, err,
        out_port=c.out_port, in_port=c.in_port,
    )


def _alpha_as_block_op(arr: np.ndarray) -> BlockPosOp:
    return BlockPosOp(SymMatrix(arr[:1, :1]), arr[:1, 1:], SymMatrix(arr[1:, 1:]))


def compose_amplitudes(a2: Amplitude, a1: Amplitude, wiring=None) -> Amplitude:
    """Compose a1 followed by a2 along their shared circle.

    Per mode: inverse Cayley to the positive block operators, Schur-compose,
    re-transform; the prefactor gains sum_modes mult * log c(alpha2, alpha1).
    """
    if a1.circle != a2.circle or a1.config != a2.config:
        raise ValueError("amplitudes are not composable: circle or config mismatch")
    if a1.projective != a2.projective:
        raise ValueError("cannot mix projective and deprojectivized amplitudes")
    if wiring is not None and tuple(wiring) != (a1.out_port, a2.in_port):
        raise ValueError(f"wiring {wiring!r} does not match ports "
                         f"({a1.out_port!r} -> {a2.in_port!r})")
    keys = {k: md for k, (md, _) in a1.block_map().items()}
    keys.update({k: md for k, (md, _) in a2.block_map().items()})
    ordered = sorted(keys.values(), key=lambda md: (md.omega, md.block, md.k))
    blocks = []
    cocycle_terms = []
    for md in ordered:
        alpha1 = _alpha_as_block_op(cayley_inverse(a1.block_at(md)).array)
        alpha2 = _alpha_as_block_op(cayley_inverse(a2.block_at(md)).array)
        comp = schur_compose(alpha2, alpha1)
        new_block = cayley(SymMatrix(comp.assembled()))
        if abs(new_block.array[0, 1]) >= 1.0:
            raise ValueError("composed block left the contraction domain")
        blocks.append((md, new_block))
        cocycle_terms.append(md.multiplicity * log_cocycle_constant(alpha2, alpha1))
    lp = a1.log_prefactor + a2.log_prefactor + math.fsum(cocycle_terms)
    return Amplitude(
        a1.circle, a1.config, a1.length + a2.length, tuple(blocks), lp,
        a1.projective, a1.error_estimate + a2.error_estimate,
        out_port=a2.out_port, in_port=a1.in_port,
    )


def amplitude_union(*amps: Amplitude) -> Amplitude:
    """Tensor rule: the amplitude of a disjoint union block-direct-sums, prefactors add."""
    if not amps:
        raise ValueError("need at least one amplitude")
    blocks = tuple((md, blk) for a in amps for md, blk in a.blocks)
    return Amplitude(
        amps[0].circle, amps[0].config, amps[0].length, blocks,
        math.fsum(a.log_prefactor for a in amps),
        amps[0].projective,
        math.fsum(a.error_estimate for a in amps),
    )


def trace_amplitude(a: Amplitude) -> float:
    """Log of the trace obtained by wiring the amplitude's out port to its own in port.

    Per mode the normalized Gaussian operator is diagonal, x^n -> q^n x^n,
    so the trace contributes -log(1 - q) per multiplicity channel on top of
    the prefactor.  Raises for blocks that are not of swap form.
    """
    terms = [a.log_prefactor]
    for md, blk in a.blocks:
        arr = blk.array
        if abs(arr[0, 0]) > 1e-10 or abs(arr[1, 1]) > 1e-10:
            raise ValueError("non-traceable port structure: block is not of swap form")
        q = 0.5 * (arr[0, 1] + arr[1, 0])
        terms.append(md.multiplicity * (-math.log1p(-q)))
    return math.fsum(terms)


def measured_log_scalar(a2: Amplitude, a1: Amplitude, fresh: Amplitude,
                        degree: int | None = None, q_floor: float = 1e-8) -> float:
    """Measure the composition scalar through truncated Fock operators.

    For each mode the Gaussian blocks are expanded to truncated operators,
    composed as matrices, and compared against the fresh glued amplitude's
    operator by a Frobenius ratio; the log ratios accumulate over modes with
    non-negligible blocks.  This is the measurement side of the projective
    scalar identity, independent of the cocycle formula.
    """
    if degree is None:
        degree = a1.config.truncation_degree
    fresh_map = fresh.block_map()
    total = []
    for key, (md, blk1) in sorted(a1.block_map().items()):
        if key not in a2.block_map() or key not in fresh_map:
            continue
        blk2 = a2.block_map()[key][1]
        blk12 = fresh_map[key][1]
        if abs(blk12.array[0, 1]) < q_floor:
            continue
        t1 = vector_to_hs(exp_vector(blk1, degree), 1, 1).matrix
        t2 = vector_to_hs(exp_vector(blk2, degree), 1, 1).matrix
        t12 = vector_to_hs(exp_vector(blk12, degree), 1, 1).matrix
        prod = t2 @ t1
        ratio = float(np.sum(prod * t12) / np.sum(t12 * t12))
        total.append(md.multiplicity * math.log(ratio))
    return math.fsum(total)


def _block_residual(a: Amplitude, b: Amplitude) -> float:
    """Max entrywise block difference over the union of mode keys."""
    keys = set(a.block_map()) | set(b.block_map())
    res = 0.0
    modes = {**{k: md for k, (md, _) in a.block_map().items()},
             **{k: md for k, (md, _) in b.block_map().items()}}
    for key in keys:
        md = modes[key]
        res = max(res, float(np.abs(a.block_at(md).array - b.block_at(md).array).max()))
    return res


def _chain_heads(scene: BordismScene):
    succ = {}
    for frm, to in scene.wiring:
        src = next(n for n, c in scene.cylinders.items() if c.out_port == frm)
        dst = next(n for n, c in scene.cylinders.items() if c.in_port == to)
        succ[src] = dst
    has_pred = set(succ.values())
    chains = []
    seen = set()
    for name in scene.cylinders:
        if name in has_pred or name in seen:
            continue
        chain = [name]
        seen.add(name)
        while chain[-1] in succ:
            chain.append(succ[chain[-1]])
            seen.add(chain[-1])
        chains.append(chain)
    cycles = []
    for name in scene.cylinders:
        if name in seen:
            continue
        cyc = [name]
        seen.add(name)
        cur = succ[name]
        while cur != name:
            cyc.append(cur)
            seen.add(cur)
            cur = succ[cur]
        cycles.append(cyc)
    return chains, cycles


def verify_functoriality(
    scene: BordismScene,
    projective: bool = False,
    block_tol: float = 1e-10,
    prefactor_tol: float = 1e-6,
    scalar_tol: float = 1e-8,
) -> dict:
    """Check every gluing in the scene and report residuals.

    For each wired chain the pairwise compositions are compared against the
    amplitudes of the merged cylinders (blocks entrywise, prefactors in log
    space), chains of three or more are re-associated both ways, traced
    cycles are compared against -1/2 logdet_torus with the swap symmetry
    cross-check, and in projective mode the measured Fock-operator scalar is
    compared against the accumulated cocycle.
    """
    cfg = scene.theory
    report: dict = {"suites": {}, "per_mode": [], "logdets": [], "pass": True}
    chains, cycles = _chain_heads(scene)

    def record(suite: str, entry: dict, ok: bool):
        report["suites"].setdefault(suite, []).append({**entry, "pass": bool(ok)})
        if not ok:
            report["pass"] = False

    amps = {name: amplitude(c, cfg, projective) for name, c in scene.cylinders.items()}

    for chain in chains:
        for i in range(len(chain) - 1):
            n1, n2 = chain[i], chain[i + 1]
            c1, c2 = scene.cylinders[n1], scene.cylinders[n2]
            composed = compose_amplitudes(amps[n2], amps[n1])
            merged = CylinderMorphism(c1.boundary, c1.length + c2.length, f"{n1}+{n2}")
            fresh = amplitude(merged, cfg, projective)
            block_res = _block_residual(composed, fresh)
            pref_res = abs(composed.log_prefactor - fresh.log_prefactor)
            entry = {
                "pair": [n1, n2],
                "block_residual": block_res,
                "prefactor_residual": pref_res,
            }
            if projective:
                measured = measured_log_scalar(amps[n2], amps[n1], fresh)
                formula = composed.log_prefactor  # inputs carry zero prefactor
                entry["measured_log_scalar"] = measured
                entry["cocycle_log_scalar"] = formula
                ok = block_res <= block_tol and abs(measured - formula) <= scalar_tol
            else:
                ok = block_res <= block_tol and pref_res <= prefactor_tol
            record("composition", entry, ok)
            for md, blk in fresh.blocks[: min(len(fresh.blocks), 24)]:
                comp_blk = composed.block_at(md)
                report["per_mode"].append(
                    {
                        "pair": [n1, n2],
                        "k": md.k,
                        "block": md.block,
                        "omega": md.omega,
                        "residual": float(np.abs(comp_blk.array - blk.array).max()),
                    }
                )
        if len(chain) >= 3:
            left = amps[chain[0]]
            for nxt in chain[1:]:
                left = compose_amplitudes(amps[nxt], left)
            right = amps[chain[-1]]
            for prv in reversed(chain[:-1]):
                right = compose_amplitudes(right, amps[prv])
            res_blocks = _block_residual(left, right)
            res_pref = abs(left.log_prefactor - right.log_prefactor)
            record(
                "associativity",
                {"chain": chain, "block_residual": res_blocks, "prefactor_residual": res_pref},
                res_blocks <= block_tol and res_pref <= prefactor_tol,
            )

    for cyc in cycles:
        total = sum(scene.cylinders[n].length for n in cyc)
        boundary = scene.cylinders[cyc[0]].boundary
        merged = CylinderMorphism(boundary, total, "+".join(cyc))
        amp = amplitude(merged, cfg, projective=False)
        log_trace = trace_amplitude(amp)
        target = math.fsum(
            -0.5 * zeta.logdet_torus(boundary.circumference, total, cfg.mass,
                                     0.0 if th is None else th).value
            for th in boundary.bundle_blocks
        )
        res = abs(log_trace - target)
        entry = {"cycle": cyc, "log_trace": log_trace, "torus_target": target, "residual": res}
        ok = res <= prefactor_tol
        if not boundary.holonomy_angles:
            sym = abs(
                zeta.logdet_torus(boundary.circumference, total, cfg.mass).value
                - zeta.logdet_torus(total, boundary.circumference, cfg.mass).value
            )
            entry["swap_symmetry_residual"] = sym
            ok = ok and sym <= 1e-8
        record("torus", entry, ok)

    for frm, to in scene.wiring:
        src = next(c for c in scene.cylinders.values() if c.out_port == frm)
        dst = next(c for c in scene.cylinders.values() if c.in_port == to)
        k_show = min(cfg.k_max, 8)
        spectrum = mode_frequencies(src.boundary, replace(cfg, k_max=k_show))
        worst = 0.0
        for md in spectrum:
            b1 = _alpha_as_block_op(alpha_block(md.omega, src.length))
            b2 = _alpha_as_block_op(alpha_block(md.omega, dst.length))
            comp = schur_compose(b2, b1).assembled()
            exact = alpha_block(md.omega, src.length + dst.length)
            worst = max(worst, float(np.abs(comp - exact).max()))
        record("alpha_gluing", {"wire": [frm, to], "max_residual": worst}, worst <= 1e-12)

    for name, cyl in scene.cylinders.items():
        ell = cyl.boundary.circumference
        for th in cyl.boundary.bundle_blocks:
            theta = 0.0 if th is None else th
            d = zeta.logdet_cylinder_dirichlet(ell, cyl.length, cfg.mass, theta)
            report["logdets"].append(
                {
                    "object": f"cylinder:{name}",
                    "theta": theta,
                    "dirichlet": {"value": d.value, "method": d.method, "error": d.error_estimate},
                }
            )
    return report
