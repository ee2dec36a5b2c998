"""Command-line entry point: ``dcit <stage> [options]`` or ``dcit run``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from dcit.clustering import read_profiles_csv
from dcit.forecast import forecast_clusters, load_scenario, write_forecast_csv
from dcit.pipeline import STAGES, RunConfig, run_pipeline
from dcit.report import gap_report, load_tdi, write_gap_csv


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="long-format panel CSV (country,year,indicator,value)")
    p.add_argument("--meta", help="country metadata CSV (country,name,cluster_hint)")
    p.add_argument("--config", help="run config JSON")
    p.add_argument("--out", help="output directory (also where prior stage outputs are read)")
    p.add_argument("--seed", type=int, help="seed for all randomness")
    p.add_argument("--year", type=int, help="reference year")
    p.add_argument("--scope", choices=["pooled", "per-year"])
    p.add_argument("--weights", help="equal | ict-heavy | fdi-heavy | path to JSON weights")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGES, "run"):
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "run" else "run all stages")
        _common(p)
        if name in ("forecast", "run"):
            p.add_argument("--scenario", action="append", help="scenario JSON (repeatable)")
        if name in ("forecast", "gap"):
            p.add_argument("--profiles", help="cluster profile CSV to use instead of run outputs")
        if name in ("gap", "run"):
            p.add_argument("--tdi", help="TDI benchmark CSV (cluster,tdi)")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {
        "input": args.input,
        "meta": args.meta,
        "out": args.out,
        "seed": args.seed,
        "year": args.year,
        "scope": args.scope,
        "weights": args.weights,
        "scenarios": getattr(args, "scenario", None),
        "tdi": getattr(args, "tdi", None),
    }
    if args.config:
        return RunConfig.from_json(args.config, **overrides)
    return RunConfig(**{k: v for k, v in overrides.items() if v is not None})


def _standalone(args: argparse.Namespace, cfg: RunConfig) -> int:
    """forecast/gap straight from a profile CSV, with no other run outputs."""
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    profiles = read_profiles_csv(args.profiles)
    if args.command == "forecast":
        specs = [load_scenario(s) for s in cfg.scenarios]
        write_forecast_csv(forecast_clusters(profiles, specs), out / "forecast.csv")
    else:
        write_gap_csv(gap_report(profiles, load_tdi(cfg.tdi), cfg.balanced_band, cfg.lagging_level),
                      out / "gap.csv")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = config_from_args(args)
        if getattr(args, "profiles", None):
            return _standalone(args, cfg)
    except (OSError, ValueError) as exc:
        print(f"dcit: {exc}", file=sys.stderr)
        return 2
    stages = STAGES if args.command == "run" else (args.command,)
    status = run_pipeline(cfg, stages)
    if status:
        print(f"dcit: {args.command} failed; see {Path(cfg.out) / 'manifest.json'}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
