"""Command-line front end for the simulation and reconstruction pipeline.

Subcommands: simulate (synthesize a coincidence record), reconstruct
(record to density matrices), report (Monte Carlo fidelity and CHSH with
one-sigma parentheses), oam-map (run the fork-hologram interface chain),
and holo (emit phase-mask images).

Exit codes: 0 success, 2 input validation, 3 numerical failure
(including non-convergence under --strict), 4 file IO.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .coincidence import (
    SourceModel,
    load_record,
    monte_carlo_uncertainty,
    probabilities_from_record,
    save_record,
    simulate_record,
)
from .errors import NumericalError, ValidationError
from .holograms import (
    DEFAULT_PERIOD,
    GratingSpec,
    dual_order_pattern,
    export_mask,
    spiral_phase,
    tomography_pattern,
)
from .oam import (
    DEFAULT_L_MAX,
    InterfaceConfig,
    chain_config_from_json_obj,
    run_chain,
)
from .quantum import (
    BELL_LABELS,
    TWO_QUBIT_LABELS,
    DensityMatrix,
    bell_state,
)
from .tomography import CANONICAL_SETTINGS, linear_inversion, mle_reconstruct


def format_with_uncertainty(value: float, sigma: float) -> str:
    """Parenthesized one-sigma notation, e.g. 92.9(5.9) or 93(12).

    The value is rounded one digit past the leading digit of the
    uncertainty, and the uncertainty is quoted to the same decimal place.
    A zero sigma falls back to four decimals and an explicit (0).
    """
    if not (math.isfinite(value) and math.isfinite(sigma)) or sigma < 0.0:
        raise ValidationError(f"cannot format value {value!r} with sigma {sigma!r}")
    if sigma == 0.0:
        return f"{value:.4f}(0)"
    decimals = max(0, 1 - math.floor(math.log10(sigma)))
    return f"{value:.{decimals}f}({sigma:.{decimals}f})"


def _load_json(path):
    try:
        with open(path, encoding="ascii") as fh:
            return json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}")


def _write_json(obj, path) -> None:
    try:
        with open(path, "w", encoding="ascii") as fh:
            json.dump(obj, fh, indent=2)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def cmd_simulate(args) -> int:
    model = SourceModel(
        total_correlated_pairs=args.pairs,
        peak_decay_time=args.peak_decay,
        peak_start_bin=args.peak_start,
        accidental_per_bin=args.accidental,
        env_per_bin=args.env,
        num_bins=args.bins,
        bin_width=args.bin_width,
    )
    if args.state is not None:
        state = DensityMatrix.bell(args.state)
    else:
        state = DensityMatrix.from_json_dict(_load_json(args.rho))
    record = simulate_record(state, model, args.seed, mc_resample=args.resample)
    save_record(record, args.out)
    for setting in CANONICAL_SETTINGS:
        hist = record.histograms[setting]
        print(f"{setting}: {int(hist.bins.sum())} counts in {hist.num_bins} bins")
    print(f"record written to {args.out}")
    return 0


def cmd_reconstruct(args) -> int:
    record = load_record(args.record)
    probs, sigmas = probabilities_from_record(record)
    rho_li = linear_inversion(probs)
    result = mle_reconstruct(probs, sigmas)
    out = {
        "linear_inversion": {
            "matrix": rho_li.to_json_dict(),
            "physical": rho_li.is_physical(),
        },
        "mle": {
            "matrix": result.rho.to_json_dict(),
            "physical": result.rho.is_physical(),
            "cost": result.cost,
            "iterations": result.iterations,
            "converged": result.converged,
        },
    }
    _write_json(out, args.out)
    print(f"linear inversion physical: {out['linear_inversion']['physical']}")
    print(f"MLE cost {result.cost:.6g} after {result.iterations} iterations"
          f" (converged: {result.converged})")
    print(f"matrices written to {args.out}")
    if not result.converged:
        print("warning: gradient tolerance not reached", file=sys.stderr)
        if args.strict:
            return 3
    return 0


def cmd_report(args) -> int:
    record = load_record(args.record)
    target = DensityMatrix.bell(args.target)
    report = monte_carlo_uncertainty(record, target, trials=args.trials, seed=args.seed)
    fid = format_with_uncertainty(report.fidelity_mean * 100.0, report.fidelity_std * 100.0)
    chsh = format_with_uncertainty(report.chsh_mean, report.chsh_std)
    print(f"target   : {args.target}")
    print(f"trials   : {report.trials} ({report.failures} failed)")
    print(f"fidelity : {fid}%")
    print(f"CHSH S   : {chsh}")
    if args.out is not None:
        _write_json(report.to_json_dict(), args.out)
        print(f"report written to {args.out}")
    if args.strict and report.failures > 0:
        print(f"error: {report.failures} Monte Carlo trials failed", file=sys.stderr)
        return 3
    return 0


def cmd_oam_map(args) -> int:
    if args.config is not None:
        coeffs, config = chain_config_from_json_obj(_load_json(args.config))
    else:
        coeffs = {0: args.c0, 1: args.c1, 2: args.c2, 3: args.c3, 4: args.c4}
        config = InterfaceConfig(theta=args.theta, anti_stokes_rotated=args.rotated)
    l_max = max(DEFAULT_L_MAX, max(coeffs))
    out = run_chain(coeffs, config, l_max)
    print("output ket (HH, HV, VH, VV):")
    for label, amp in zip(TWO_QUBIT_LABELS, out.vector):
        print(f"  {label}: {amp.real:+.6f}{amp.imag:+.6f}j")
    print(f"success_weight: {out.success_weight:.6f}")
    for name in BELL_LABELS:
        f = float(abs(np.vdot(bell_state(name), out.vector)) ** 2)
        print(f"fidelity {name}: {f:.3f}")
    return 0


def _parse_size(text: str) -> tuple[int, int]:
    parts = text.lower().split("x")
    try:
        width, height = int(parts[0]), int(parts[1])
    except (ValueError, IndexError):
        raise ValidationError(f"size must look like 1080x1080, got {text!r}")
    if len(parts) != 2:
        raise ValidationError(f"size must look like 1080x1080, got {text!r}")
    return width, height


def cmd_holo(args) -> int:
    width, height = _parse_size(args.size)
    spec = GratingSpec(period_g=args.period, width=width, height=height)
    kind = args.kind
    if kind == "spiral":
        mask = spiral_phase(args.l, spec)
    elif kind in ("lh", "lv", "ld", "la", "ll", "lr"):
        mask = tomography_pattern(kind.upper(), spec)
    elif kind == "dual":
        mask = dual_order_pattern(spec, rotated=args.rot)
    elif kind == "dual-rot":
        mask = dual_order_pattern(spec, rotated=True)
    else:  # argparse choices prevent this
        raise ValidationError(f"unknown hologram kind {kind!r}")
    export_mask(mask, args.out, "pgm8" if args.format == "pgm" else "png8")
    print(f"{kind} mask {width}x{height} written to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oampol",
        description="Simulate, reconstruct, and report two-qubit polarization "
                    "entanglement from coincidence records; generate SLM masks.")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_sim = sub.add_parser("simulate", help="synthesize a 16-setting coincidence record")
    state_group = p_sim.add_mutually_exclusive_group(required=True)
    state_group.add_argument("--state", choices=BELL_LABELS,
                             help="Bell state to simulate")
    state_group.add_argument("--rho", metavar="PATH",
                             help="density-matrix JSON ({re, im} 4x4 lists)")
    p_sim.add_argument("--out", required=True, metavar="PATH", help="record JSON output")
    p_sim.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p_sim.add_argument("--pairs", type=float, default=SourceModel.total_correlated_pairs,
                       help="correlated pairs across the peak window")
    p_sim.add_argument("--peak-decay", type=float, default=SourceModel.peak_decay_time,
                       help="peak decay time in bin-width units")
    p_sim.add_argument("--peak-start", type=int, default=SourceModel.peak_start_bin,
                       help="first bin of the peak window")
    p_sim.add_argument("--accidental", type=float, default=SourceModel.accidental_per_bin,
                       help="accidental coincidences per bin")
    p_sim.add_argument("--env", type=float, default=SourceModel.env_per_bin,
                       help="stray light and dark counts per bin")
    p_sim.add_argument("--bins", type=int, default=SourceModel.num_bins,
                       help="number of histogram bins")
    p_sim.add_argument("--bin-width", type=float, default=SourceModel.bin_width,
                       help="bin width in ns")
    p_sim.add_argument("--resample", choices=("net", "bins"), default="net",
                       help="Monte Carlo resampling mode stored on the record")
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("reconstruct",
                           help="record to density matrices (inversion + MLE)")
    p_rec.add_argument("--record", required=True, metavar="PATH", help="record JSON input")
    p_rec.add_argument("--out", required=True, metavar="PATH", help="matrices JSON output")
    p_rec.add_argument("--strict", action="store_true",
                       help="exit 3 if the MLE gradient tolerance is not reached")
    p_rec.set_defaults(func=cmd_reconstruct)

    p_rep = sub.add_parser("report",
                           help="Monte Carlo fidelity and CHSH with one-sigma errors")
    p_rep.add_argument("--record", required=True, metavar="PATH", help="record JSON input")
    p_rep.add_argument("--target", required=True, choices=BELL_LABELS,
                       help="Bell state the fidelity refers to")
    p_rep.add_argument("--trials", type=int, default=10_000,
                       help="Monte Carlo trials (default 10000)")
    p_rep.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    p_rep.add_argument("--out", metavar="PATH", help="also write the report as JSON")
    p_rep.add_argument("--strict", action="store_true",
                       help="exit 3 if any Monte Carlo trial fails")
    p_rep.set_defaults(func=cmd_report)

    p_oam = sub.add_parser("oam-map",
                           help="run the fork-hologram interface chain")
    p_oam.add_argument("--config", metavar="PATH",
                       help='chain JSON {"c": {...}, "rotated": bool, "theta_rad": float}')
    p_oam.add_argument("--c0", type=float, default=0.0, help="l=0 coefficient")
    p_oam.add_argument("--c1", type=float, default=1.0, help="l=1 coefficient")
    p_oam.add_argument("--c2", type=float, default=0.0, help="l=2 coefficient")
    p_oam.add_argument("--c3", type=float, default=0.0, help="l=3 coefficient")
    p_oam.add_argument("--c4", type=float, default=0.0, help="l=4 coefficient")
    p_oam.add_argument("--theta", type=float, default=0.0,
                       help="modulator phase in radians")
    p_oam.add_argument("--rotated", action="store_true",
                       help="rotate the anti-Stokes hologram by 180 degrees")
    p_oam.set_defaults(func=cmd_oam_map)

    p_holo = sub.add_parser("holo", help="write a phase-mask image")
    p_holo.add_argument("--kind", required=True,
                        choices=("spiral", "lh", "lv", "ld", "la", "ll", "lr",
                                 "dual", "dual-rot"),
                        help="mask type")
    p_holo.add_argument("--l", type=int, default=1, help="spiral winding index")
    p_holo.add_argument("--period", type=float, default=DEFAULT_PERIOD,
                        help="grating period in px")
    p_holo.add_argument("--size", default="1080x1080", metavar="WxH", help="mask size in px")
    p_holo.add_argument("--rot", action="store_true",
                        help="180-degree rotation (dual kind)")
    p_holo.add_argument("--out", required=True, metavar="PATH", help="image output path")
    p_holo.add_argument("--format", choices=("pgm", "png"), default="pgm",
                        help="image format (pgm is the bit-exact reference)")
    p_holo.set_defaults(func=cmd_holo)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
