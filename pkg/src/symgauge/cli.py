"""Command-line front end: ``symgauge run|list|check``.

Exit status: 0 when every enabled check passes, 1 when a check fails,
2 for configuration or usage errors.
"""

from __future__ import annotations

import argparse
import sys

from .errors import SymgaugeError
from .scenarios import ScenarioConfig, list_scenarios, run_scenario


def _load(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config)
    if args.output_dir is not None:
        cfg.output_dir = args.output_dir
    if args.steps is not None:
        cfg.steps = args.steps
    if args.dt is not None:
        cfg.dt = args.dt
    return cfg.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="symgauge", description="Canonical electrodynamics and gauge mechanics scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run a scenario configuration"), ("check", "validate a configuration without running it")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("config", help="YAML scenario configuration")
        p.add_argument("--output-dir", default=None, help="override output_dir")
        p.add_argument("--steps", type=int, default=None, help="override steps")
        p.add_argument("--dt", type=float, default=None, help="override dt (absolute)")
    sub.add_parser("list", help="list registered scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        for name, description in list_scenarios():
            print(f"{name:32s} {description}")
        return 0
    try:
        cfg = _load(args)
        if args.command == "check":
            print(f"config ok: scenario {cfg.scenario}")
            return 0
        report = run_scenario(cfg)
    except (SymgaugeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(report.summary())
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
