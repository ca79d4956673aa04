"""Command line entry point: ``wearnoma run | validate | preset fig4``."""

from __future__ import annotations

import argparse
import sys

from .harness import SCHEMES, emit_report, run_campaign
from .scenario import ConfigError, fig4_preset, load_config, save_config, validate_config


def _parse_sweep(text):
    name, sep, values = text.partition("=")
    if not sep or not name or not values:
        raise argparse.ArgumentTypeError("sweep must look like NAME=V1,V2,...")
    try:
        return name, [float(v) for v in values.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad sweep value: {exc}") from None


def _parse_schemes(text):
    schemes = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in schemes if s not in SCHEMES]
    if bad or not schemes:
        raise argparse.ArgumentTypeError(
            f"unknown scheme(s) {bad}; choose from {', '.join(SCHEMES)}")
    return schemes


def build_parser():
    ap = argparse.ArgumentParser(
        prog="wearnoma",
        description="Monte-Carlo downlink wearable cell with MU-MIMO, NOMA and D2D underlay")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a campaign and write reports")
    run.add_argument("--config", help="flat JSON configuration file (defaults if omitted)")
    run.add_argument("--scheme", type=_parse_schemes, default=["NOMA+D2D", "OMA+D2D"],
                     help="comma-separated schemes (default NOMA+D2D,OMA+D2D)")
    run.add_argument("--sweep", type=_parse_sweep, help="NAME=V1,V2,...")
    run.add_argument("--drops", type=int, help="override drops_N")
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--out", default="results", help="output directory")
    run.add_argument("--format", choices=["csv", "json"], default="csv")

    val = sub.add_parser("validate", help="check a configuration file")
    val.add_argument("config")

    pre = sub.add_parser("preset", help="write a preset configuration file")
    pre.add_argument("name", choices=["fig4"])
    pre.add_argument("-o", "--output", default="-", help="file to write (default stdout)")
    return ap


def _run(args):
    cfg = load_config(args.config) if args.config else fig4_preset()
    if args.drops is not None:
        cfg = cfg.replace(drops_N=args.drops)
    if args.seed is not None:
        cfg = cfg.replace(master_seed=args.seed)
    validate_config(cfg)
    report = run_campaign(cfg, args.scheme, sweep=args.sweep, workers=args.workers)
    for path in emit_report(report, args.out, args.format):
        print(path)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            _run(args)
        elif args.command == "validate":
            cfg = load_config(args.config)
            print(f"{args.config}: valid ({cfg.antennas_M}x{cfg.users_per_beam_K} beams, "
                  f"{cfg.dwd_pairs_D} D2D pairs, pool {cfg.cwd_pool_Nc})")
        elif args.command == "preset":
            if args.output == "-":
                import json
                print(json.dumps(fig4_preset().to_dict(), indent=2))
            else:
                save_config(fig4_preset(), args.output)
    except ConfigError as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
