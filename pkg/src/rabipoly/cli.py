"""Command line interface: spectra, scans, oracles, comparisons, reports.

Exit codes: 0 on success, 1 on usage or parameter errors, 2 when a
computation fails to converge or an internal consistency check trips.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .analysis import capacity_probe, compare_methods, scan_F, spacing_stats
from .braak import braak_spectrum
from .dho import dho_eigenvalue
from .errors import RabipolyError
from .model import EnergyValue, ModelParams, Parity, parity_for_delta_zero
from .serialize import serialize
from .solver import EnergyLevel, SolverOptions, Spectrum, merge_spectra, \
    solve_spectrum

__all__ = ["main", "build_parser"]


class _Parser(argparse.ArgumentParser):
    """Argument parser whose usage failures exit with code 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rabipoly", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, needs_delta=True):
        p.add_argument("--kappa", type=float, required=True,
                       help="coupling, must be > 0")
        if needs_delta:
            p.add_argument("--delta", type=float, required=True,
                           help="level splitting, must be >= 0")
        p.add_argument("--omega", type=float, default=1.0,
                       help="mode frequency (default 1.0)")
        p.add_argument("--trunc", type=int, default=2000,
                       help="truncation order (default 2000)")
        p.add_argument("--tol", type=float, default=1e-12,
                       help="series/root tolerance (default 1e-12)")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--plot", action="store_true",
                       help="also render a figure next to --out")

    def parity_arg(p):
        p.add_argument("--parity", choices=("plus", "minus", "both"),
                       default="both")

    def levels_arg(p):
        p.add_argument("--levels", type=int, default=10,
                       help="number of levels (default 10)")

    p = sub.add_parser("spectrum", help="eigenvalues of the parity chains")
    common(p)
    parity_arg(p)
    levels_arg(p)

    p = sub.add_parser("scan", help="sample F on a grid with pole annotations")
    common(p)
    parity_arg(p)
    p.add_argument("--xmin", type=float, help="x range start (parity route)")
    p.add_argument("--xmax", type=float, help="x range end (parity route)")
    p.add_argument("--zmin", type=float, help="zeta range start (unresolved route)")
    p.add_argument("--zmax", type=float, help="zeta range end (unresolved route)")
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("dho", help="exact displaced-oscillator levels")
    common(p, needs_delta=False)
    levels_arg(p)

    p = sub.add_parser("braak", help="spectrum from the G function pair")
    common(p)
    p.add_argument("--zmin", type=float, required=True)
    p.add_argument("--zmax", type=float, required=True)
    p.add_argument("--samples", type=int, default=2000)

    p = sub.add_parser("compare", help="three-way spectrum comparison")
    common(p)
    levels_arg(p)

    p = sub.add_parser("stats", help="level spacing statistics")
    common(p)
    parity_arg(p)
    levels_arg(p)

    p = sub.add_parser("capacity", help="probe how many levels are computable")
    common(p)
    parity_arg(p)
    p.add_argument("--ceiling", type=int, default=500,
                   help="level-count ceiling (default 500)")
    p.add_argument("--budget", type=float, default=60.0,
                   help="time budget in seconds (default 60)")

    return parser


def _opts(args) -> SolverOptions:
    # the series cap follows the truncation order so one flag controls
    # both truncation mechanisms
    return SolverOptions(n_trunc=args.trunc, cf_tol=args.tol,
                         cf_n_max=max(16, 2 * args.trunc),
                         root_tol=args.tol)


def _params(args) -> ModelParams:
    return ModelParams(args.kappa, getattr(args, "delta", 0.0), args.omega)


def _parity_spectrum(args) -> Spectrum:
    params = _params(args)
    opts = _opts(args)
    if args.parity == "both":
        return merge_spectra([
            solve_spectrum(params, Parity.PLUS, args.levels, opts),
            solve_spectrum(params, Parity.MINUS, args.levels, opts),
        ])
    return solve_spectrum(params, Parity.from_string(args.parity),
                          args.levels, opts)


def _dho_spectrum(args) -> Spectrum:
    params = _params(args)
    levels = tuple(
        EnergyLevel(
            index=l,
            parity=parity_for_delta_zero(),
            value=EnergyValue(dho_eigenvalue(l, params.kappa)),
            bracket=(dho_eigenvalue(l, params.kappa),) * 2,
            residual=0.0,
            n_trunc=0,
            stable=True,
        )
        for l in range(args.levels)
    )
    return Spectrum(params=params, levels=levels, variable="closed_form",
                    options=_opts(args))


def _scan(args):
    has_x = args.xmin is not None or args.xmax is not None
    has_z = args.zmin is not None or args.zmax is not None
    if has_x == has_z:
        raise ValueError("give exactly one range: --xmin/--xmax or --zmin/--zmax")
    params = _params(args)
    opts = _opts(args)
    if has_z:
        if args.zmin is None or args.zmax is None:
            raise ValueError("both --zmin and --zmax are required")
        return scan_F(params, "schweber", args.zmin, args.zmax,
                      args.samples, opts)
    if args.xmin is None or args.xmax is None:
        raise ValueError("both --xmin and --xmax are required")
    if args.parity == "both":
        raise ValueError("the x-route scan needs --parity plus or minus")
    return scan_F(params, Parity.from_string(args.parity),
                  args.xmin, args.xmax, args.samples, opts)


def _braak(args) -> Spectrum:
    span = args.zmax - args.zmin
    if span <= 0:
        raise ValueError("need --zmin < --zmax")
    per_unit = max(16, int(math.ceil(args.samples / span)))
    return braak_spectrum(_params(args), args.zmin, args.zmax, per_unit,
                          _opts(args))


def _run(args):
    """(result, figure renderer or None) for the selected subcommand."""
    from . import plotting

    if args.command == "spectrum":
        return _parity_spectrum(args), plotting.render_spectrum
    if args.command == "scan":
        return _scan(args), plotting.render_scan
    if args.command == "dho":
        return _dho_spectrum(args), plotting.render_spectrum
    if args.command == "braak":
        return _braak(args), plotting.render_spectrum
    if args.command == "compare":
        return compare_methods(_params(args), args.levels, _opts(args)), None
    if args.command == "stats":
        return spacing_stats(_parity_spectrum(args)), plotting.render_spacing
    if args.command == "capacity":
        if args.parity == "both":
            raise ValueError("capacity probes one parity chain at a time")
        return capacity_probe(_params(args), Parity.from_string(args.parity),
                              args.ceiling, args.budget, _opts(args)), None
    raise ValueError(f"unknown command {args.command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.plot and not args.out:
        print("rabipoly: error: --plot requires --out", file=sys.stderr)
        return 1
    try:
        result, renderer = _run(args)
        if args.plot and renderer is None:
            raise ValueError(f"{args.command} has no figure output")
        text = serialize(result, args.format)
    except RabipolyError as exc:
        print(f"rabipoly: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"rabipoly: error: {exc}", file=sys.stderr)
        return 1
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        if args.plot:
            stem, _ = os.path.splitext(args.out)
            renderer(result, stem + ".png")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
