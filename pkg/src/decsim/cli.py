"""Command-line entry point.

Subcommands:

- ``run``: one scenario, writes trajectory CSV and metrics file
- ``compare``: both modes with identical plant/initial conditions, plus a
  side-by-side metrics table
- ``validate-config``: parse and echo the effective configuration

Exit codes: 0 ok, 2 configuration error, 3 simulation divergence.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .config import ConfigError, ScenarioConfig, load_scenario, serialize_config
from .dynamics import SimulationDiverged
from .harness import MetricsReport, simulate, trajectory_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="decsim",
        description="Distributed posture-control simulator (triple inverted pendulum)",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("run", "compare", "validate-config"):
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, default=None, help="configuration file")
        p.add_argument("--mode", choices=("original", "distributed"), default=None)
        p.add_argument("--te", type=float, default=None, help="arbitration slot length, s")
        p.add_argument("--duration", type=float, default=None, help="simulated time, s")
        p.add_argument("--dt", type=float, default=None, help="tick length, s")
        p.add_argument("--q0", type=str, default=None,
                       help="initial joint angles 'ankle,knee,hip' in rad")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE", help="config override (repeatable)")
    return parser


def _flag_overrides(args) -> list[str]:
    """Translate dedicated flags into config overrides (flags win last)."""
    out = []
    if args.mode is not None:
        out.append(f"scenario.mode={args.mode}")
    if args.te is not None:
        out.append(f"scenario.T_e={args.te}")
    if args.duration is not None:
        out.append(f"scenario.duration={args.duration}")
    if args.dt is not None:
        out.append(f"scenario.dt={args.dt}")
    if args.q0 is not None:
        parts = args.q0.split(",")
        if len(parts) != 3:
            raise ConfigError("--q0 expects three comma-separated angles")
        for name, v in zip(("ankle", "knee", "hip"), parts):
            out.append(f"scenario.q0_{name}={v.strip()}")
    return out


def _load(args) -> ScenarioConfig:
    return load_scenario(args.config, list(args.overrides) + _flag_overrides(args))


def _config_header(cfg: ScenarioConfig) -> list[str]:
    return ["effective configuration:"] + serialize_config(cfg).splitlines()


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _metrics_text(report: MetricsReport, header: list[str]) -> str:
    return "".join(f"# {line}\n" for line in header) + report.as_text()


def cmd_run(args) -> int:
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    header = _config_header(cfg)
    try:
        result = simulate(cfg)
    except SimulationDiverged as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    _write(args.out / f"trajectory_{cfg.mode}.csv",
           trajectory_csv(result.samples, header))
    _write(args.out / f"metrics_{cfg.mode}.txt", _metrics_text(result.metrics, header))
    return EXIT_OK


def _compare_table(original: MetricsReport, distributed: MetricsReport) -> str:
    rows = [f"{'Variable':<10}{'Index':<16}{'Original':>14}{'Distributed':>14}"]
    for var in ("TS", "KNEE", "BS"):
        o, d = original.variables[var], distributed.variables[var]
        rows.append(f"{var:<10}{'overshoot':<16}{o.overshoot_deg:>13.4f}°{d.overshoot_deg:>13.4f}°")
        rows.append(f"{var:<10}{'rise time':<16}{o.rise_time:>12.2f} s{d.rise_time:>12.2f} s")
        rows.append(f"{var:<10}{'settling time':<16}{o.settling_time:>12.2f} s{d.settling_time:>12.2f} s")
    rows.append(f"{'':<10}{'energy':<16}{original.energy:>12.2f} J{distributed.energy:>12.2f} J")
    return "\n".join(rows) + "\n"


def cmd_compare(args) -> int:
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    reports = {}
    for mode in ("original", "distributed"):
        mode_cfg = replace(cfg, mode=mode)
        header = _config_header(mode_cfg)
        try:
            result = simulate(mode_cfg)
        except SimulationDiverged as exc:
            print(f"divergence ({mode}): {exc}", file=sys.stderr)
            return EXIT_DIVERGED
        _write(args.out / f"trajectory_{mode}.csv",
               trajectory_csv(result.samples, header))
        _write(args.out / f"metrics_{mode}.txt", _metrics_text(result.metrics, header))
        reports[mode] = result.metrics
    table = _compare_table(reports["original"], reports["distributed"])
    _write(args.out / "compare_metrics.txt",
           "".join(f"# {line}\n" for line in _config_header(cfg)) + table)
    print(table, end="")
    return EXIT_OK


def cmd_validate_config(args) -> int:
    try:
        cfg = _load(args)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(serialize_config(cfg), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {
        "run": cmd_run,
        "compare": cmd_compare,
        "validate-config": cmd_validate_config,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
