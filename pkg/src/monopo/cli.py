"""Command-line front end: ``monopo <command> [options]``.

Exit codes: 0 success, 2 configuration or usage error, 3 domain error
(pump at or above threshold, failed fit).
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import analysis, coresonance, locksim, squeezing
from .config import SHIPPED, ConfigError, load_config
from .tables import write_csv

EXIT_USAGE = 2
EXIT_DOMAIN = 3


class UsageError(Exception):
    pass


def _out_path(args, config, default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    return config.output_dir / default_name


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"cannot parse number list {text!r}") from None


def cmd_scan(args) -> int:
    config = load_config(args.config)
    t_ref = config.crystal.t_ref
    t_min = t_ref - 2.0 if args.t_min is None else args.t_min
    t_max = t_ref + 2.0 if args.t_max is None else args.t_max
    if not args.step > 0:
        raise UsageError("--step must be positive")
    if t_max < t_min:
        raise UsageError("--t-max must not be below --t-min")
    table = coresonance.scan_table(config.crystal, config.cavity, t_min, t_max, args.step)
    path = _out_path(args, config, "scan.csv")
    write_csv(table, path)
    print(path)
    return 0


def cmd_spectrum(args) -> int:
    config = load_config(args.config)
    p = config.squeezing
    if not args.f_max_mhz > 0 or args.points < 2:
        raise UsageError("--f-max-mhz must be positive and --points at least 2")
    x = squeezing.pump_to_x(args.pump_mw * 1e-3, p.p_threshold)
    f = np.linspace(0.0, args.f_max_mhz * 1e6, args.points)
    if args.include_mhz is not None:
        f = np.union1d(f, [args.include_mhz * 1e6])
    table = squeezing.spectrum(p, x, f)
    path = _out_path(args, config, "spectrum.csv")
    write_csv(table, path)
    print(path)
    return 0


def cmd_sweep(args) -> int:
    config = load_config(args.config)
    powers = np.array(_floats(args.powers_mw)) * 1e-3
    if powers.size == 0:
        raise UsageError("--powers-mw is empty")
    table = squeezing.pump_sweep(config.squeezing, powers, args.f_mhz * 1e6)
    path = _out_path(args, config, "sweep.csv")
    write_csv(table, path)
    print(path)
    return 0


def cmd_fit(args) -> int:
    config = load_config(args.config)
    free = [v.strip() for v in args.free.split(",") if v.strip()]
    if not free:
        raise UsageError("--free names no parameters")
    unknown = set(free) - set(analysis.FREE_PARAMS)
    if unknown:
        raise UsageError(f"unknown free parameter(s): {', '.join(sorted(unknown))}")
    data = analysis.load_observations(args.data)
    result = analysis.fit_model(data, config.squeezing, free=free, domain=args.domain)
    path = _out_path(args, config, "fit.json")
    path.write_text(result.to_json(indent=2) + "\n")
    print(path)
    return 0


def cmd_locksim(args) -> int:
    config = load_config(args.config)
    result = locksim.simulate_lock(config.lock, args.duration_s, seed=args.seed)
    path = _out_path(args, config, "locksim.csv")
    write_csv(result.series, path)
    summary_path = path.with_suffix(".json")
    summary = dict(result.summary, seed=args.seed, duration_s=args.duration_s)
    summary_path.write_text(json.dumps(summary, indent=2) + "\n")
    print(path)
    print(summary_path)
    return 0


def cmd_report(args) -> int:
    names = args.config or list(SHIPPED)
    configs = [load_config(name) for name in names]
    table = analysis.report_table([c.report for c in configs])
    print(analysis.format_report(table))
    if args.out:
        Path(args.out).write_text(json.dumps(table, indent=2) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monopo", description="Monolithic OPO design and squeezing analysis toolkit."
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help, config_default="opo1"):
        p = sub.add_parser(name, help=help)
        if config_default is not None:
            p.add_argument("--config", default=config_default,
                           help="config file or shipped name (opo1, opo2, opo3)")
        p.add_argument("--out", help="output file (default: <output_dir>/<command>.<ext>)")
        p.set_defaults(func=func)
        return p

    p = add("scan", cmd_scan, "transmission comb and conversion efficiency versus temperature")
    p.add_argument("--t-min", type=float, help="degC (default t_ref - 2)")
    p.add_argument("--t-max", type=float, help="degC (default t_ref + 2)")
    p.add_argument("--step", type=float, default=1e-3, help="K")

    p = add("spectrum", cmd_spectrum, "squeezing spectrum at fixed pump power")
    p.add_argument("--pump-mw", type=float, required=True)
    p.add_argument("--f-max-mhz", type=float, default=100.0)
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--include-mhz", type=float, default=2.0,
                   help="extra frequency row to include (default 2 MHz)")

    p = add("sweep", cmd_sweep, "squeezing versus pump power")
    p.add_argument("--powers-mw", required=True, help="comma-separated list")
    p.add_argument("--f-mhz", type=float, default=2.0)

    p = add("fit", cmd_fit, "fit the noise model to measured levels")
    p.add_argument("--data", required=True, help="CSV with power_mW,freq_MHz,quadrature,value_dB")
    p.add_argument("--free", default="theta_tilde",
                   help="comma-separated subset of theta_tilde,p_threshold,loss_L")
    p.add_argument("--domain", choices=("db", "linear"), default="db")

    p = add("locksim", cmd_locksim, "simulate the locking cascade")
    p.add_argument("--duration-s", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)

    p = add("report", cmd_report, "summary table across OPOs", config_default=None)
    p.add_argument("--config", action="append",
                   help="config file or shipped name; repeat for several OPOs (default: all shipped)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, analysis.TraceFormatError) as exc:
        print(f"monopo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (squeezing.AboveThresholdError, analysis.FitError, ValueError) as exc:
        print(f"monopo {args.command}: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"monopo {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
