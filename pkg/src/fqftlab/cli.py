"""Command-line front end: scene verification, determinant calculators, spectra.

Subcommands: verify, zeta, spectrum, amplitude.  Scenes and reports are JSON,
spectra are CSV.  Exit codes: 0 pass, 1 invariant failure, 2 usage or parse
error.  With --threads 1 (and --no-timings) reports are byte-identical across
runs; per-mode work is embarrassingly parallel and is mapped over a thread
pool for larger --threads, with results assembled in deterministic order.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from importlib import resources

from . import fqft, zeta
from .geom import BordismScene, CircleObject, CylinderMorphism, TheoryConfig, mode_frequencies

SCHEMA_VERSION = "fqft-lab-report/1"
DEFAULT_BLOCK_TOL = 1e-10
DEFAULT_PREFACTOR_TOL = 1e-6


class SceneError(ValueError):
    """Scene file fails validation (unresolved references, bad numbers)."""


def bundled_scene_path(name: str):
    """Path to a scene shipped with the package, e.g. 'two_cylinders'."""
    if not name.endswith(".json"):
        name = name + ".json"
    return resources.files("fqftlab").joinpath("scenes", name)


def scene_from_dict(doc: dict) -> tuple[BordismScene, float]:
    """Build a scene from its JSON document; returns (scene, block tolerance)."""
    try:
        theory = doc["theory"]
        cfg = TheoryConfig(
            mass=float(theory["mass"]),
            k_max=int(theory["k_max"]),
            truncation_degree=int(theory["truncation_degree"]),
        )
        tolerance = float(theory.get("tolerance", DEFAULT_BLOCK_TOL))
        circles = {}
        for entry in doc["circles"]:
            label = str(entry["label"])
            if label in circles:
                raise SceneError(f"duplicate circle label {label!r}")
            circles[label] = CircleObject(
                float(entry["circumference"]),
                tuple(entry.get("holonomy_angles", ())),
            )
        cylinders = {}
        for entry in doc["cylinders"]:
            label = str(entry["label"])
            if label in cylinders:
                raise SceneError(f"duplicate cylinder label {label!r}")
            circle_label = str(entry["circle"])
            if circle_label not in circles:
                raise SceneError(f"cylinder {label!r} references unknown circle {circle_label!r}")
            cylinders[label] = CylinderMorphism(
                circles[circle_label], float(entry["length"]), label
            )
        wiring = tuple(
            (str(w["from_port"]), str(w["to_port"])) for w in doc.get("wiring", ())
        )
        scene = BordismScene(cfg, circles, cylinders, wiring)
    except SceneError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SceneError(str(exc)) from exc
    return scene, tolerance


def scene_to_dict(scene: BordismScene, tolerance: float = DEFAULT_BLOCK_TOL) -> dict:
    circle_labels = {id(c): label for label, c in scene.circles.items()}
    return {
        "theory": {
            "mass": scene.theory.mass,
            "k_max": scene.theory.k_max,
            "truncation_degree": scene.theory.truncation_degree,
            "tolerance": tolerance,
        },
        "circles": [
            {
                "label": label,
                "circumference": c.circumference,
                "holonomy_angles": list(c.holonomy_angles),
            }
            for label, c in scene.circles.items()
        ],
        "cylinders": [
            {
                "label": label,
                "circle": next(
                    cl for cl, c in scene.circles.items() if c == cyl.boundary
                ),
                "length": cyl.length,
            }
            for label, cyl in scene.cylinders.items()
        ],
        "wiring": [{"from_port": frm, "to_port": to} for frm, to in scene.wiring],
    }


def load_scene(path: str) -> tuple[BordismScene, float, dict]:
    """Read a scene file, falling back to a bundled scene of the same name."""
    if os.path.exists(path):
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    else:
        bundled = bundled_scene_path(path)
        if bundled.is_file():
            text = bundled.read_text(encoding="utf-8")
        else:
            raise FileNotFoundError(path)
    doc = json.loads(text)
    scene, tol = scene_from_dict(doc)
    return scene, tol, doc


def _emit(report: dict, out_path: str | None):
    text = json.dumps(report, indent=2, sort_keys=True)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def thread_map(fn, items, threads: int):
    """Order-preserving map; a thread pool is used when threads > 1."""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def cmd_verify(args) -> int:
    started = time.perf_counter()
    try:
        scene, scene_tol, doc = load_scene(args.scene)
    except FileNotFoundError:
        print(f"error: scene file not found: {args.scene}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(
            f"error: scene parse failure at line {exc.lineno}, column {exc.colno}: {exc.msg}",
            file=sys.stderr,
        )
        return 2
    except SceneError as exc:
        print(f"error: invalid scene: {exc}", file=sys.stderr)
        return 2
    block_tol = args.block_tol if args.block_tol is not None else scene_tol
    report = fqft.verify_functoriality(
        scene,
        projective=args.projective,
        block_tol=block_tol,
        prefactor_tol=args.prefactor_tol,
    )
    report["schema_version"] = SCHEMA_VERSION
    report["inputs"] = doc
    report["settings"] = {
        "projective": args.projective,
        "block_tol": block_tol,
        "prefactor_tol": args.prefactor_tol,
        "threads": args.threads,
    }
    if not args.no_timings:
        report["timings"] = {"wall_seconds": time.perf_counter() - started}
    _emit(report, args.out)
    return 0 if report["pass"] else 1


def _logdet_entry(name: str, results: dict) -> dict:
    methods = {
        label: {"value": ld.value, "method": ld.method, "error": ld.error_estimate}
        for label, ld in results.items()
    }
    values = [ld.value for ld in results.values()]
    return {
        "object": name,
        "methods": methods,
        "agreement_delta": max(values) - min(values) if len(values) > 1 else 0.0,
    }


def cmd_zeta(args) -> int:
    started = time.perf_counter()
    kind = args.object
    try:
        if kind == "circle":
            results = {
                "closed-form": zeta.logdet_circle(args.l, args.m, args.theta, "closed-form"),
                "continuation": zeta.logdet_circle(args.l, args.m, args.theta, "continuation"),
            }
            entry = _logdet_entry("circle", results)
        elif kind == "cylinder":
            results = {
                "assembly": zeta.logdet_cylinder_dirichlet(args.l, args.L, args.m, args.theta),
            }
            if args.theta == 0.0:
                results["swap"] = zeta.logdet_cylinder_dirichlet(
                    args.l, args.L, args.m, 0.0, method="swap"
                )
            entry = _logdet_entry("cylinder-dirichlet", results)
        elif kind == "torus":
            results = {"assembly": zeta.logdet_torus(args.l, args.L, args.m, args.theta)}
            if args.theta == 0.0:
                results["swapped"] = zeta.logdet_torus(args.L, args.l, args.m)
            entry = _logdet_entry("torus", results)
        else:  # dtn
            direct = zeta.logdet_dtn_sum(args.l, args.m, args.L1, args.L2, args.theta)
            glued = zeta.logdet_cylinder_dirichlet(args.l, args.L1 + args.L2, args.m, args.theta)
            parts = [
                zeta.logdet_cylinder_dirichlet(args.l, L, args.m, args.theta)
                for L in (args.L1, args.L2)
            ]
            via_gluing = zeta.LogDet(
                glued.value - parts[0].value - parts[1].value,
                "continuation",
                glued.error_estimate + parts[0].error_estimate + parts[1].error_estimate,
            )
            entry = _logdet_entry("dtn-sum", {"direct": direct, "via-gluing": via_gluing})
    except (ValueError, zeta.ContinuationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {"schema_version": SCHEMA_VERSION, "logdets": [entry], "pass": True}
    if not args.no_timings:
        report["timings"] = {"wall_seconds": time.perf_counter() - started}
    _emit(report, args.out)
    return 0


def cmd_spectrum(args) -> int:
    try:
        circle = CircleObject(args.l, tuple(args.theta or ()))
        cfg = TheoryConfig(args.m, args.k_max, 2)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = ["k,omega,multiplicity"
            + (",twist" if circle.holonomy_angles else "")
            + (",decay" if args.L is not None else "")]
    for md in mode_frequencies(circle, cfg):
        row = f"{md.k},{md.omega!r},{md.multiplicity}"
        if circle.holonomy_angles:
            row += f",{md.theta!r}"
        if args.L is not None:
            row += f",{math.exp(-md.omega * args.L)!r}"
        rows.append(row)
    text = "\n".join(rows) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_amplitude(args) -> int:
    started = time.perf_counter()
    try:
        circle = CircleObject(args.l, tuple(args.theta or ()))
        cfg = TheoryConfig(args.m, args.k_max, args.truncation)
        cyl = CylinderMorphism(circle, args.L, "cyl")
        amp = fqft.amplitude(cyl, cfg, projective=args.projective)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    report = {
        "schema_version": SCHEMA_VERSION,
        "pass": True,
        "amplitude": {
            "log_prefactor": amp.log_prefactor,
            "error_estimate": amp.error_estimate,
            "projective": amp.projective,
            "modes": [
                {
                    "k": md.k,
                    "block_index": md.block,
                    "omega": md.omega,
                    "multiplicity": md.multiplicity,
                    "cayley_offdiag": blk.array[0, 1],
                }
                for md, blk in amp.blocks
            ],
        },
    }
    if not args.no_timings:
        report["timings"] = {"wall_seconds": time.perf_counter() - started}
    _emit(report, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fqft-lab",
        description="Verification suites and determinant calculators for the free boson on circles and flat cylinders.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("FQFT_LAB_THREADS", "1")),
        help="worker threads for per-mode computations (1 = bitwise reproducible)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run every invariant suite on a scene file")
    p_verify.add_argument("scene", help="scene JSON path (or bundled scene name)")
    p_verify.add_argument("--out", help="write the JSON report here instead of stdout")
    p_verify.add_argument("--projective", action="store_true",
                          help="drop zeta prefactors and test the projective scalar instead")
    p_verify.add_argument("--block-tol", type=float, default=None,
                          help="per-mode block residual tolerance (default: scene tolerance or 1e-10)")
    p_verify.add_argument("--prefactor-tol", type=float, default=DEFAULT_PREFACTOR_TOL)
    p_verify.add_argument("--no-timings", action="store_true",
                          help="omit wall-clock timings for byte-identical reports")
    p_verify.set_defaults(func=cmd_verify)

    p_zeta = sub.add_parser("zeta", help="zeta-regularized log determinants")
    p_zeta.add_argument("object", choices=["circle", "cylinder", "torus", "dtn"])
    p_zeta.add_argument("--l", type=float, required=True, help="circle circumference")
    p_zeta.add_argument("--m", type=float, required=True, help="mass")
    p_zeta.add_argument("--L", type=float, help="cylinder/torus length")
    p_zeta.add_argument("--L1", type=float, help="first cylinder length (dtn)")
    p_zeta.add_argument("--L2", type=float, help="second cylinder length (dtn)")
    p_zeta.add_argument("--theta", type=float, default=0.0, help="holonomy twist angle")
    p_zeta.add_argument("--out")
    p_zeta.add_argument("--no-timings", action="store_true")
    p_zeta.set_defaults(func=cmd_zeta)

    p_spec = sub.add_parser("spectrum", help="mode table as CSV")
    p_spec.add_argument("--l", type=float, required=True)
    p_spec.add_argument("--m", type=float, required=True)
    p_spec.add_argument("--k-max", type=int, default=16)
    p_spec.add_argument("--L", type=float, help="if given, adds the e^{-omega L} decay column")
    p_spec.add_argument("--theta", type=float, action="append",
                        help="holonomy angle; repeat for higher-rank bundles")
    p_spec.add_argument("--out", help="CSV output path (default stdout)")
    p_spec.set_defaults(func=cmd_spectrum)

    p_amp = sub.add_parser("amplitude", help="cylinder amplitude data")
    p_amp.add_argument("--l", type=float, required=True)
    p_amp.add_argument("--L", type=float, required=True)
    p_amp.add_argument("--m", type=float, required=True)
    p_amp.add_argument("--k-max", type=int, default=12)
    p_amp.add_argument("--truncation", type=int, default=16)
    p_amp.add_argument("--theta", type=float, action="append")
    p_amp.add_argument("--projective", action="store_true")
    p_amp.add_argument("--out")
    p_amp.add_argument("--no-timings", action="store_true")
    p_amp.set_defaults(func=cmd_amplitude)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "zeta":
        need = {"cylinder": ["L"], "torus": ["L"], "dtn": ["L1", "L2"]}.get(args.object, [])
        missing = [f"--{name}" for name in need if getattr(args, name) is None]
        if missing:
            parser.error(f"{args.object} requires {', '.join(missing)}")
        if min(x for x in (args.l, args.m, args.L, args.L1, args.L2) if x is not None) <= 0:
            parser.error("all geometric parameters must be positive")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
