"""Command-line interface.

    stagebench run [spec.ini] [--out DIR] [--seed N] [--workers N] [--dump-config]
    stagebench tune CONTROLLER grid.ini [--spec spec.ini] [--out DIR]
    stagebench check-gains --rho R --h1 H1 --h2 H2

Exit codes: 0 success, 1 configuration error, 2 a run faulted.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import argparse
import configparser
import sys

from . import bench as bench_mod
from . import config as config_mod
from .controllers import gain_check


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stagebench",
        description="Closed-loop wafer-stage controller benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the benchmark matrix from a spec file")
    p_run.add_argument("spec", nargs="?", default=None,
                       help="INI spec file (defaults used when omitted)")
    p_run.add_argument("--out", default=None, help="output directory override")
    p_run.add_argument("--seed", type=int, default=None,
                       help="run a single seed instead of the spec's seed list")
    p_run.add_argument("--workers", type=int, default=None,
                       help="parallel episode workers")
    p_run.add_argument("--set", action="append", default=[], metavar="SEC.KEY=VAL",
                       help="override any config value (repeatable)")
    p_run.add_argument("--dump-config", action="store_true",
                       help="print the fully resolved config and exit")

    p_tune = sub.add_parser("tune", help="grid-search one controller on case 1")
    p_tune.add_argument("controller", choices=("pid", "smc", "fosta", "annfsa"))
    p_tune.add_argument("grid", help="INI file with a [grid] section")
    p_tune.add_argument("--spec", default=None, help="base spec file")
    p_tune.add_argument("--out", default=None, help="directory for tune_<ctl>.csv")
    p_tune.add_argument("--seed", type=int, default=None, help="episode seed")

    p_gain = sub.add_parser("check-gains",
                            help="evaluate the super-twisting gain conditions")
    p_gain.add_argument("--rho", type=float, required=True)
    p_gain.add_argument("--h1", type=float, required=True)
    p_gain.add_argument("--h2", type=float, required=True)
    return parser


def _overrides_from_args(args) -> dict[str, str]:
    overrides: dict[str, str] = {}
    for item in getattr(args, "set", []):
        if "=" not in item:
            raise config_mod.ConfigError(f"--set expects SEC.KEY=VAL, got {item!r}")
        dotted, val = item.split("=", 1)
        overrides[dotted.strip()] = val.strip()
    if getattr(args, "out", None):
        overrides["bench.output_dir"] = args.out
    if getattr(args, "seed", None) is not None:
        overrides["bench.seeds"] = str(args.seed)
    if getattr(args, "workers", None) is not None:
        overrides["bench.workers"] = str(args.workers)
    return overrides


def _cmd_run(args) -> int:
    resolved = config_mod.load_config(args.spec, _overrides_from_args(args))
    if args.dump_config:
        print(config_mod.dump(resolved), end="")
        return 0
    spec = config_mod.build_bench_spec(resolved)
    report = bench_mod.run_bench(spec)
    out = Path(spec.output_dir)
    print((out / "summary.txt").read_text(), end="")
    if report.any_faulted:
        print("at least one run faulted; see report.txt", file=sys.stderr)
        return 2
    return 0


def _cmd_tune(args) -> int:
    base_resolved = config_mod.load_config(args.spec, _overrides_from_args(args))
    parser = configparser.ConfigParser()
    try:
        with open(args.grid) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise config_mod.ConfigError(f"cannot read grid file {args.grid}: {exc}")
    if not parser.has_section("grid"):
        raise config_mod.ConfigError("grid file needs a [grid] section")
    grid = config_mod.parse_grid({"grid": dict(parser.items("grid"))})
    base = config_mod.build_sim_config(base_resolved, args.controller, case="case1")
    if args.seed is not None:
        base = replace(base, seed=args.seed)
    result = bench_mod.tune_grid(args.controller, grid, base)
    print(f"best {args.controller}: rms={result.best_rms_um:.6f} um, "
          f"peak={result.best_peak_um:.6f} um")
    for key, val in result.best_params.items():
        print(f"  {key} = {val:g}")
    if args.out:
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        keys = sorted(result.best_params)
        lines = [",".join(keys + ["rms_um", "peak_um", "faulted"])]
        for params, rms, peak, faulted in result.table:
            lines.append(",".join([f"{params[k]:g}" for k in keys]
                                  + [f"{rms:.17g}", f"{peak:.17g}",
                                     str(faulted).lower()]))
        (outdir / f"tune_{args.controller}.csv").write_text("\n".join(lines) + "\n")
    return 0


def _cmd_check_gains(args) -> int:
    try:
        res = gain_check(args.rho, args.h1, args.h2)
    except ValueError as exc:
        raise config_mod.ConfigError(str(exc))
    print(f"h1_min      = {res.h1_min:.12g}")
    print(f"h2_required = {res.h2_required:.12g}")
    print(f"satisfied   = {str(res.satisfied).lower()}")
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "tune":
            return _cmd_tune(args)
        if args.command == "check-gains":
            return _cmd_check_gains(args)
    except config_mod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
