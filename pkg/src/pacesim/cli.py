"""Command-line front-end.

    pacesim fig3        --out results --seed 1 --trials 500
    pacesim ise-vs-snr  --out results --mode analytic
    pacesim ise-vs-l    --out results --trials 200
    pacesim pll-trace   --out results --recovery arrayed
    pacesim overhead    --out results

Exit codes: 0 success, 1 configuration error, 2 simulation diagnostic.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import ConfigError, SimulationDiagnosticError
from .harness import default_config, run_experiment

_SUBCOMMANDS = {
    "fig3": "fig3",
    "ise-vs-snr": "ise_vs_snr",
    "ise-vs-l": "ise_vs_l",
    "pll-trace": "pll_trace",
    "overhead": "overhead",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacesim",
        description="Link-level simulator for reference-tone aided analog "
                    "beamforming experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=str, default=None,
                       help="JSON file with ExperimentConfig overrides")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides config)")
        p.add_argument("--out", type=str, default="results",
                       help="output directory")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte-Carlo trials (overrides config)")
        p.add_argument("--mode", choices=("nonlinear", "analytic"),
                       default=None, help="recovery evaluation mode")
        p.add_argument("--recovery", choices=("one_pll", "arrayed"),
                       default=None, help="recovery circuit")
    return parser


def _resolve_config(args) -> "ExperimentConfig":
    overrides: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as fh:
                overrides = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        if not isinstance(overrides, dict):
            raise ConfigError("config file must hold a JSON object")
        overrides.pop("experiment", None)
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.mode is not None:
        overrides["mode"] = args.mode
    if args.recovery is not None:
        overrides["recovery"] = args.recovery
    return default_config(_SUBCOMMANDS[args.command], **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _resolve_config(args)
        run_experiment(cfg, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except SimulationDiagnosticError as exc:
        print(f"simulation diagnostic: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
