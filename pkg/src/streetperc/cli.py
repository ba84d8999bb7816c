"""Command line interface: declarative percolation experiments.

Each subcommand runs one experiment type; ``--config`` points at a YAML
mapping, and ``--seed``, ``--out``, ``--workers`` override the
corresponding config fields.  ``replot`` redraws the SVG plots of a
finished run from its CSVs without simulating anything.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    load_config,
    replot,
    run_experiment,
)

_HELP = {
    "threshold": "estimate the critical device intensity from a crossing curve",
    "crossing-curves": "crossing curves for several window sizes",
    "theta": "percolation probability via sequential device counts",
    "stretch": "hop-count stretch factor over far-apart pairs",
    "table1": "critical intensity table over a grid of dimensionless radii",
}


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="streetperc",
        description="Percolation experiments for device networks on random "
        "street systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        sp = sub.add_parser(name, help=_HELP[name])
        sp.add_argument("--config", type=Path, help="YAML experiment config")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", type=Path, help="override the output directory")
        sp.add_argument("--workers", type=int, help="parallel worker processes")
    rp = sub.add_parser("replot", help="redraw plots from a run's CSV outputs")
    rp.add_argument("--out", type=Path, required=True, help="run output directory")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "replot":
            replot(args.out)
            print(f"plots regenerated in {args.out}")
            return 0
        raw = load_config(args.config) if args.config else {}
        declared = raw.get("experiment")
        if declared is not None and declared != args.command:
            raise ConfigError(
                "experiment",
                f"config declares {declared!r} but subcommand is {args.command!r}",
            )
        raw["experiment"] = args.command
        for key in ("seed", "out", "workers"):
            value = getattr(args, key)
            if value is not None:
                raw[key] = value if key != "out" else str(value)
        cfg = ExperimentConfig.from_mapping(raw)
        out = run_experiment(cfg)
        print(f"experiment {cfg.experiment!r} finished; outputs in {out}")
        return 0
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
