"""Command-line front end: ``pckit generate | solve | sweep``.

Angles are degrees everywhere. Outputs start with ``#`` comment lines that
record the tool version and the full run configuration; with identical
configuration and inputs the output files are byte-identical.
"""

import argparse
import sys
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import SPEED_OF_LIGHT, __version__
from .errors import MalformedInput, PhaseCenterError, PolarizationMismatch
from .farfield import (Hand, ModeSet, Polarization, Wavenumber, load_manifest, to_circular,
                       write_manifest, write_pattern_file)
from .geometry import Direction, Displacement, select_region
from .grid import SphericalGrid
from .oracle import SyntheticSpec, Taper, generate
from .solver import default_config, prepare_mode, residual_pattern, solve_modes, sweep_theta

RESULT_COLUMNS = ("mode", "phi0_deg", "theta0_deg", "x_pc_m", "y_pc_m", "z_pc_m",
                  "x_pc_lambda", "y_pc_lambda", "z_pc_lambda", "psi_c_deg",
                  "var_before", "var_after", "n_p", "mag_spread_db", "converged", "clipped")


def _header(command: str, args: argparse.Namespace) -> list[str]:
    lines = [f"pckit {__version__}", f"command={command}"]
    for key in sorted(vars(args)):
        if key in ("func", "command"):
            continue
        lines.append(f"{key}={getattr(args, key)!r}")
    return lines


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def result_row(res, theta0=None, phi0=None) -> list[str]:
    d = res.displacement
    lx, ly, lz = res.displacement_wavelengths
    return [_fmt(res.mode_id), _fmt(res.center.phi), _fmt(res.center.theta),
            _fmt(d.x_pc), _fmt(d.y_pc), _fmt(d.z_pc), _fmt(lx), _fmt(ly), _fmt(lz),
            _fmt(res.psi_c), _fmt(res.variance_before), _fmt(res.variance_after),
            _fmt(res.n_p), _fmt(res.magnitude_spread_db), _fmt(res.converged), _fmt(res.clipped)]


def _write_table(path, comments, columns, rows) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(columns))
    lines += [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path is None or str(path) == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def load_modes(manifests, hand: Hand) -> ModeSet:
    """Read manifests and reduce each mode to one analysed component."""
    by_mode = defaultdict(dict)
    frequencies, wavelengths = set(), set()
    for m in manifests:
        pattern, meta = load_manifest(m)
        if pattern.polarization in by_mode[pattern.mode_id]:
            raise MalformedInput(f"mode {pattern.mode_id} {pattern.polarization.value} given twice")
        by_mode[pattern.mode_id][pattern.polarization] = pattern
        frequencies.add(meta["frequency_hz"])
        if "wavelength_m" in meta:
            wavelengths.add(meta["wavelength_m"])
    if len(frequencies) != 1 or len(wavelengths) > 1:
        raise MalformedInput("manifests disagree on frequency or wavelength")

    wanted = Polarization.RHCP if hand is Hand.RIGHT else Polarization.LHCP
    chosen = []
    for mode_id in sorted(by_mode):
        comps = by_mode[mode_id]
        if wanted in comps:
            chosen.append(comps[wanted])
        elif Polarization.THETA in comps and Polarization.PHI in comps:
            chosen.append(to_circular(comps[Polarization.THETA], comps[Polarization.PHI], hand))
        elif len(comps) == 1:
            chosen.append(next(iter(comps.values())))
        else:
            raise PolarizationMismatch(
                f"mode {mode_id}: cannot pick a component from {sorted(p.value for p in comps)}")
    return ModeSet(tuple(chosen), frequencies.pop(), wavelengths.pop() if wavelengths else None)


def _config(args, wavelength):
    overrides = {}
    if args.max_iter is not None:
        overrides["max_iterations"] = args.max_iter
    if args.x_tol is not None:
        overrides["x_tolerance"] = args.x_tol
    if args.f_tol is not None:
        overrides["f_tolerance"] = args.f_tol
    if args.restart:
        overrides["restart"] = True
    return default_config(wavelength, **overrides)


def _solver_kwargs(args, wavelength):
    return {"search_radius": args.search_radius_lambda * wavelength,
            "paper_z_sin_theta": args.paper_z_sin_theta}


def cmd_solve(args) -> int:
    modes = load_modes(args.manifests, Hand(args.hand.upper()))
    wl = modes.wavelength
    center = _direction(args.center_phi, args.center_theta)
    config = _config(args, wl)
    results = solve_modes(modes, center, args.diameter, config, **_solver_kwargs(args, wl))
    comments = _header("solve", args) + [f"wavelength_m={wl!r}"]
    comments += [f"mode {r.mode_id}: {msg}" for r in results for msg in r.diagnostics]
    _write_table(args.out, comments, RESULT_COLUMNS, [result_row(r) for r in results])

    if args.residual_out:
        region = select_region(modes.grid, center, args.diameter)
        rows = []
        for pattern, res in zip(modes.modes, results):
            phases, _ = prepare_mode(pattern)
            resid = residual_pattern(phases, res.displacement, region, modes.wavenumber,
                                     args.paper_z_sin_theta)
            for p, t, v in zip(region.phi.tolist(), region.theta.tolist(), resid.values.tolist()):
                rows.append([_fmt(res.mode_id), _fmt(p), _fmt(t), _fmt(v)])
        _write_table(args.residual_out, comments, ("mode", "phi_deg", "theta_deg", "psi_eq_deg"), rows)
    return 0


def _theta_list(args) -> list[float]:
    if args.thetas:
        return [float(t) for t in args.thetas]
    count = int(round((args.theta_stop - args.theta_start) / args.theta_step)) + 1
    if count < 1:
        raise MalformedInput("empty theta range")
    return [args.theta_start + i * args.theta_step for i in range(count)]


def cmd_sweep(args) -> int:
    modes = load_modes(args.manifests, Hand(args.hand.upper()))
    wl = modes.wavelength
    thetas = _theta_list(args)
    for t in thetas:
        _direction(args.plane_phi % 360.0, t)
    sweep = sweep_theta(modes, args.plane_phi, thetas, args.diameter, _config(args, wl),
                        **_solver_kwargs(args, wl))
    comments = _header("sweep", args) + [f"wavelength_m={wl!r}"]
    rows = []
    nan = _fmt(float("nan"))
    for e in sweep.entries:
        if e.result is None:
            comments.append(f"mode {e.mode_id} theta {e.theta:g}: {type(e.error).__name__}: {e.error}")
            rows.append([_fmt(e.mode_id), _fmt(sweep.plane), _fmt(e.theta)] + [nan] * 9
                        + ["0", nan, _fmt(False), _fmt(e.clipped)])
        else:
            comments += [f"mode {e.mode_id} theta {e.theta:g}: {m}" for m in e.result.diagnostics]
            rows.append(result_row(e.result))
    _write_table(args.out, comments, RESULT_COLUMNS, rows)
    return 0


def cmd_generate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    grid = SphericalGrid(args.resolution)
    wavelength = SPEED_OF_LIGHT / args.frequency_hz
    k = Wavenumber.from_wavelength(wavelength)
    comments = _header("generate", args)
    displacements = args.displacement_mm or [[0.0, 0.0, 0.0]]
    for i, mm in enumerate(displacements, start=1):
        spec = SyntheticSpec(Displacement(*(v * 1e-3 for v in mm)),
                             Taper(args.taper.upper()), args.constant_phase,
                             args.noise_sigma, args.seed + i - 1)
        pattern = generate(spec, grid, k, mode_id=i, paper_z_sin_theta=args.paper_z_sin_theta)
        stem = f"{args.prefix}{i}"
        write_pattern_file(pattern, out / f"{stem}.csv", comments)
        write_manifest(out / f"{stem}.manifest", args.frequency_hz, i, Polarization.RHCP,
                       f"{stem}.csv", comments)
        print(out / f"{stem}.manifest")
    return 0


def _direction(phi, theta) -> Direction:
    try:
        return Direction(phi, theta)
    except ValueError as exc:
        raise MalformedInput(str(exc)) from None


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def _add_solver_options(p):
    p.add_argument("manifests", nargs="+", help="pattern manifest files (key=value)")
    p.add_argument("--diameter", type=_positive, default=20.0, help="cap diameter, degrees")
    p.add_argument("--paper-z-sin-theta", action="store_true",
                   help="use the literal sin(theta) z term from the original derivation")
    p.add_argument("--max-iter", type=int, default=None)
    p.add_argument("--x-tol", type=_positive, default=None, help="simplex size tolerance, meters")
    p.add_argument("--f-tol", type=_positive, default=None, help="objective spread tolerance, deg^2")
    p.add_argument("--restart", action="store_true", help="restart the simplex once after converging")
    p.add_argument("--search-radius-lambda", type=_positive, default=10.0)
    p.add_argument("--hand", choices=("right", "left"), default="right",
                   help="circular component to analyse when theta/phi components are given")
    p.add_argument("--out", default="-", help="results CSV (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pckit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pckit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="phase center of every mode over one region")
    _add_solver_options(p)
    p.add_argument("--center-phi", type=float, required=True)
    p.add_argument("--center-theta", type=float, required=True)
    p.add_argument("--residual-out", default=None, help="CSV of equiphase residuals per region sample")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="phase centers along theta in a fixed-phi plane")
    _add_solver_options(p)
    p.add_argument("--plane-phi", type=float, default=0.0)
    p.add_argument("--theta-start", type=float, default=0.0)
    p.add_argument("--theta-stop", type=float, default=90.0)
    p.add_argument("--theta-step", type=_positive, default=5.0)
    p.add_argument("--thetas", type=float, nargs="+", default=None, help="explicit theta list")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("generate", help="write synthetic point-source fixtures")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--displacement-mm", type=float, nargs=3, action="append", metavar=("X", "Y", "Z"),
                   help="true phase-center offset of one mode; repeat for more modes")
    p.add_argument("--frequency-hz", type=_positive, default=7.25e9)
    p.add_argument("--resolution", type=_positive, default=1.0)
    p.add_argument("--taper", choices=("uniform", "cosine_theta"), default="uniform")
    p.add_argument("--constant-phase", type=float, default=0.0)
    p.add_argument("--noise-sigma", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", default="mode")
    p.add_argument("--paper-z-sin-theta", action="store_true")
    p.set_defaults(func=cmd_generate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PhaseCenterError as exc:
        print(f"error\t{exc.exit_code}\t{type(exc).__name__}\t{exc}", file=sys.stderr)
        return exc.exit_code
    except (ValueError, OSError) as exc:
        print(f"error\t{MalformedInput.exit_code}\tMalformedInput\t{exc}", file=sys.stderr)
        return MalformedInput.exit_code


if __name__ == "__main__":
    sys.exit(main())
