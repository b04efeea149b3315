"""Command-line interface: ``simulate``, ``estimate`` and ``selftest``.

Exit codes: 0 success, 1 usage error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import grenander as gr
from . import maxscore as ms
from .core import ContractError, substream
from .selftest import run_selftest
from .sim import (
    EXAMPLES,
    FORMATS,
    INTERVALS,
    METHODS,
    MethodRow,
    SimConfig,
    emit_report,
    interval,
    point_estimate,
    run_monte_carlo,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _tuning(s: str):
    if s == "rot":
        return s
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tuning must be a positive number or 'rot', got {s!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("tuning must be positive")
    return v


def _common(p):
    p.add_argument("--example", required=True, choices=EXAMPLES)
    p.add_argument("--B", type=int, default=500, help="bootstrap draws")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--c-rot", type=float, default=1.0, dest="c_rot",
                   help="constant of the n^(-1/7) rule-of-thumb steps")
    p.add_argument("--kde-constant", type=float, default=gr.KDE_ROT_CONSTANT, dest="kde_constant")
    p.add_argument("--x0", type=float, default=1.0, help="evaluation point (grenander)")
    p.add_argument("--interval", default="basic", choices=INTERVALS,
                   help="basic: theta_hat minus draw quantiles; percentile: plus")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cuberoot", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="Monte Carlo coverage and length report")
    _common(p)
    p.add_argument("--dgp", type=int, default=1, choices=(1, 2, 3))
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--S", type=int, default=100, help="replications")
    p.add_argument("--method", action="append", choices=METHODS)
    p.add_argument("--tuning", action="append", type=_tuning)
    p.add_argument("--m", action="append", type=int, help="m-out-of-n resample size")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--format", default="csv", choices=FORMATS)
    p.add_argument("--threads", type=int, default=None,
                   help="worker threads (default: $CUBEROOT_THREADS or CPU count)")

    p = sub.add_parser("estimate", help="point estimate and one interval for a data file")
    _common(p)
    p.add_argument("file", help="maxscore: lines 'y x1 x2'; grenander: one value per line")
    p.add_argument("--method", default="reshaped_plugin", choices=METHODS)
    p.add_argument("--tuning", default="rot", type=_tuning)
    p.add_argument("--m", type=int, default=None)

    sub.add_parser("selftest", help="oracle-equivalence checks")
    return parser


def _load(path: str, example: str):
    with open(path, encoding="utf-8") as fh:
        text = fh.read().replace(",", " ")
    arr = np.loadtxt(text.splitlines(), ndmin=2)
    if example == "maxscore":
        if arr.shape[1] != 3:
            raise ContractError("maxscore input needs three columns: y x1 x2")
        return ms.binary_response_sample(arr[:, 0], arr[:, 1], arr[:, 2])
    if arr.shape[1] != 1:
        raise ContractError("grenander input needs one value per line")
    return arr[:, 0]


def _simulate(args) -> int:
    cfg = SimConfig(
        example=args.example, dgp_id=args.dgp, n=args.n, S=args.S, B=args.B, alpha=args.alpha,
        methods=tuple(args.method or METHODS), tuning_grid=tuple(args.tuning or ("rot",)),
        m_values=tuple(args.m) if args.m else None, master_seed=args.seed, x0=args.x0,
        c_rot=args.c_rot, kde_constant=args.kde_constant, interval=args.interval,
    )
    data = emit_report(run_monte_carlo(cfg, threads=args.threads), args.format)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(data)
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def _estimate(args) -> int:
    data = _load(args.file, args.example)
    n = data.n if args.example == "maxscore" else data.size
    if args.method == "m_out_of_n":
        m = args.m if args.m is not None else int(round(n ** (2.0 / 3.0)))
        row = MethodRow(args.method, f"m={m}", m)
    elif args.method == "standard":
        row = MethodRow(args.method, "-")
    else:
        row = MethodRow(args.method, str(args.tuning), None if args.tuning == "rot" else args.tuning)
    cfg = SimConfig(example=args.example, dgp_id=1, n=max(n, 2), S=1, B=args.B, alpha=args.alpha,
                    master_seed=args.seed, x0=args.x0, c_rot=args.c_rot,
                    kde_constant=args.kde_constant, interval=args.interval)
    est = point_estimate(args.example, data, args.x0)
    (lo, hi), tune, failed = interval(cfg, data, est, row, substream(args.seed, row.tag, 0))
    print(f"estimate {est:.6g}")
    print(f"ci_{1 - args.alpha:.6g} [{lo:.6g}, {hi:.6g}] method={row.method} tuning={row.tuning}"
          + ("" if tune is None else f" value={tune:.6g}") + (" repaired" if failed else ""))
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "estimate":
            return _estimate(args)
        results = run_selftest()
        for name, ok in results.items():
            print(f"{'PASS' if ok else 'FAIL'} {name}")
        return 0 if all(results.values()) else 2
    except (ContractError, ValueError, RuntimeError, OSError) as exc:
        print(f"cuberoot: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
