"""Command-line front end.

Subcommands: cover-cube, cover-hypersurface, chain, doubling-bound,
experiment {hyperbola|quadric|product}, verify.  Every run produces one
JSON report (stdout or --out DIR/report.json); --out also writes the flat
sweep table (table.csv) and matplotlib figures next to it.  Exit code is
0 iff every invariant check in the report passed (2 for usage errors).
"""

from __future__ import annotations

import argparse
import sys

from . import experiments
from .report import ExperimentReport


def _parse_real_points(text: str, m: int):
    if not text:
        return []
    points = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        coords = tuple(float(tok) for tok in chunk.split(","))
        if len(coords) != m:
            raise ValueError(f"point {chunk!r} has {len(coords)} coordinates, expected {m}")
        points.append(coords)
    return points


def _parse_float_list(text: str):
    return [float(tok) for tok in text.split(",") if tok.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="doublecover",
        description="Doubling ball covers, level-set chart atlases, and "
                    "chain-propagated doubling bounds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--samples", type=int, default=4000)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--format", choices=("report", "table"), default="report")
        p.add_argument("--no-figures", action="store_true")

    p = sub.add_parser("cover-cube", help="cover a punctured cube with balls")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--punctures", default="", help="semicolon-separated points, e.g. '0,0;0.5,0.25'")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    common(p)

    p = sub.add_parser("cover-hypersurface", help="chart atlas on a polynomial level set")
    p.add_argument("--poly", required=True, help="e.g. 'z1*z2 - 0.01'")
    p.add_argument("--dim", type=int, required=True, help="number of complex variables")
    p.add_argument("--level-re", type=float, default=0.0)
    p.add_argument("--level-im", type=float, default=0.0)
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--mode", choices=("practical", "faithful"), default="practical")
    p.add_argument("--gamma", type=float, default=None)
    common(p)

    p = sub.add_parser("chain", help="cube chain between two covered points")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--punctures", default="")
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--from", dest="v", required=True, help="point 'x1,...,xm'")
    p.add_argument("--to", dest="w", required=True)
    common(p)

    p = sub.add_parser("doubling-bound", help="chain-propagated bound on the hyperbola")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--d1", type=int, default=1, help="degree of the restricted polynomial")
    p.add_argument("--point-t", type=float, default=0.0,
                   help="surface coordinate t of the target (z1 = eps e^{t+i theta})")
    p.add_argument("--point-theta", type=float, default=0.0)
    p.add_argument("--omega-radius", type=float, default=0.5)
    p.add_argument("--dt", type=float, default=0.125, help="seed-grid spacing")
    common(p)

    p = sub.add_parser("experiment", help="built-in parameter sweeps")
    p.add_argument("which", choices=("hyperbola", "quadric", "product"))
    p.add_argument("--eps-list", default=None, help="comma-separated values")
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--n", type=int, default=2, help="quadric dimension")
    p.add_argument("--d", type=int, default=2, help="product factor count")
    common(p)

    p = sub.add_parser("verify", help="quick cross-module invariant battery")
    common(p)
    return parser


def _emit(report: ExperimentReport, args) -> int:
    if args.out:
        report.write(args.out, figures=not args.no_figures)
    if args.format == "table":
        sys.stdout.write(report.table_csv())
    else:
        sys.stdout.write(report.to_json())
    return 0 if report.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "cover-cube":
            punctures = _parse_real_points(args.punctures, args.dim)
            report = experiments.run_cover_cube(
                args.dim, punctures, args.delta, args.gamma,
                seed=args.seed, samples=args.samples)
        elif args.command == "cover-hypersurface":
            report = experiments.run_cover_hypersurface(
                args.poly, args.dim, complex(args.level_re, args.level_im),
                args.K, args.delta, mode=args.mode, gamma=args.gamma,
                seed=args.seed, samples=args.samples)
        elif args.command == "chain":
            punctures = _parse_real_points(args.punctures, args.dim)
            v = _parse_real_points(args.v, args.dim)[0]
            w = _parse_real_points(args.w, args.dim)[0]
            report = experiments.run_chain(
                args.dim, punctures, args.delta, args.gamma, v, w, seed=args.seed)
        elif args.command == "doubling-bound":
            report = experiments.run_doubling_bound(
                args.eps, args.d1, complex(args.point_t, args.point_theta),
                omega_radius=args.omega_radius, dt=args.dt,
                seed=args.seed, samples=args.samples)
        elif args.command == "experiment":
            if args.which == "hyperbola":
                eps_list = (_parse_float_list(args.eps_list) if args.eps_list
                            else [2.0**-j for j in range(3, 10)])
                report = experiments.run_hyperbola(
                    eps_list, gamma=args.gamma, seed=args.seed, samples=args.samples)
            elif args.which == "quadric":
                eps_list = (_parse_float_list(args.eps_list) if args.eps_list
                            else [2.0**-j for j in range(2, 7)])
                report = experiments.run_quadric(
                    args.n, eps_list, gamma=args.gamma, seed=args.seed,
                    samples=args.samples)
            else:
                eps_list = (_parse_float_list(args.eps_list) if args.eps_list
                            else [2.0**-j for j in range(4, 9)])
                report = experiments.run_product(
                    args.d, eps_list, gamma=args.gamma, seed=args.seed,
                    samples=args.samples)
        else:
            report = experiments.run_verify(seed=args.seed, samples=args.samples)
    except ValueError as exc:
        parser.exit(2, f"error: {exc}\n")
    return _emit(report, args)


if __name__ == "__main__":
    sys.exit(main())
