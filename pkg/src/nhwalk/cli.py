"""Command-line entry point ``nhwalk``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 acceptance failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .errors import ConfigurationError, DomainError, NHWalkError
from .floquet import DEFAULT_STEPS
from .harness import RunConfig, parse_angle, read_config, reproduce_all, run

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_ACCEPTANCE = 0, 2, 3, 4

# subcommand path -> experiment
COMMANDS = {
    ("simulate", "single"): "single_walk",
    ("simulate", "pair"): "pair_walk",
    ("analyze", "spectra"): "spectra",
    ("analyze", "gbz"): "gbz",
    ("analyze", "table1"): "table1",
    ("entropy",): "entropy_curve",
    ("sweep", "phi"): "lyapunov_sweep",
}
PHI_LIST = {"entropy_curve", "lyapunov_sweep"}


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", type=Path, help="YAML file with lattice: and run: sections")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--steps-per-period", type=int, help=f"RK4 steps per period (default {DEFAULT_STEPS})")
    p.add_argument("--format", choices=("csv", "json"), help="dataset format (default csv)")
    p.add_argument("--phi", nargs="+", help="geometric phase(s), e.g. 0 pi/4 pi/2")
    p.add_argument("--n-straight", type=int, help="number of straight waveguides")
    p.add_argument("--periods", nargs="+", type=int, help="periods to record (entropy: last one is k_max)")
    p.add_argument("--inject", nargs="+", type=int, help="1-based injection site(s)")
    p.add_argument("--n-sites", type=int, help="lattice size for N=30 / ring analyses")
    p.add_argument("--method", choices=("master", "transmission"), help="pair engine")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nhwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    groups: dict[str, argparse._SubParsersAction] = {}
    for path in COMMANDS:
        if len(path) == 1:
            p = sub.add_parser(path[0], help=f"run the {COMMANDS[path]} experiment")
        else:
            if path[0] not in groups:
                g = sub.add_parser(path[0])
                groups[path[0]] = g.add_subparsers(dest="action", required=True)
            p = groups[path[0]].add_parser(path[1], help=f"run the {COMMANDS[path]} experiment")
        p.set_defaults(experiment=COMMANDS[path])
        _common(p)

    rep = sub.add_parser("reproduce-all", help="run the acceptance suite and write a report")
    rep.add_argument("--out", type=Path, default=Path("results/acceptance"))
    rep.add_argument("--config", type=Path, help="YAML with run: tolerances: overrides")
    rep.add_argument("--steps-per-period", type=int, default=DEFAULT_STEPS)
    rep.add_argument("--tolerance", action="append", default=[], metavar="KEY=VALUE",
                     help="override one acceptance threshold")
    rep.add_argument("--only", nargs="+", type=int, help="criterion numbers to run")
    rep.add_argument("--inject-fault", help="corrupt one computed fixture to prove failures surface")
    rep.set_defaults(experiment=None)

    ren = sub.add_parser("render", help="write SVG plots for every CSV dataset in a directory")
    ren.add_argument("directory", type=Path)
    ren.set_defaults(experiment=None)
    return parser


def _config_from_args(args) -> RunConfig:
    lattice, run_section = read_config(args.config) if args.config else ({}, {})
    run_section.pop("experiment", None)
    if args.n_straight is not None:
        lattice["n_straight"] = args.n_straight
    if args.phi:
        phis = [parse_angle(p) for p in args.phi]
        if args.experiment in PHI_LIST:
            run_section["phis"] = phis
        elif len(phis) == 1:
            lattice["phase_phi"] = phis[0]
        else:
            raise ConfigurationError(f"{args.experiment} takes a single --phi")
    overrides = {
        "out": args.out, "steps_per_period": args.steps_per_period, "format": args.format,
        "injection": args.inject, "n_sites": args.n_sites, "method": args.method,
    }
    if args.periods:
        overrides["periods"] = args.periods
    run_section.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig.build(args.experiment, lattice, **run_section)


def _tolerances(args) -> dict[str, float]:
    tol = {}
    if args.config:
        _, run_section = read_config(args.config)
        tol.update(run_section.get("tolerances") or {})
    for item in args.tolerance:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigurationError(f"--tolerance expects KEY=VALUE, got {item!r}")
        try:
            tol[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigurationError(f"tolerance {key} is not a number: {value!r}") from exc
    return tol


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "reproduce-all":
            from .acceptance import CRITERIA, DEFAULT_TOLERANCES, FAULTS
            tol = _tolerances(args)
            bad = set(tol) - set(DEFAULT_TOLERANCES)
            if bad:
                raise ConfigurationError(f"unknown tolerance keys {sorted(bad)}; "
                                         f"known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
            if args.only and set(args.only) - set(CRITERIA):
                raise ConfigurationError(f"criteria are numbered {min(CRITERIA)}..{max(CRITERIA)}")
            if args.inject_fault and args.inject_fault not in FAULTS:
                raise ConfigurationError(f"unknown fault; choose from {', '.join(sorted(FAULTS))}")
            manifest, results = reproduce_all(args.out, tol, args.inject_fault, args.only,
                                              args.steps_per_period)
            for r in results:
                print(r.line())
            print(f"report: {args.out / 'acceptance_report.txt'}")
            failed = [r for r in results if not r.passed and not r.informational]
            return EXIT_ACCEPTANCE if failed else EXIT_OK
        if args.command == "render":
            from .render import render_directory
            for path in render_directory(args.directory):
                print(path)
            return EXIT_OK
        cfg = _config_from_args(args)
        manifest = run(cfg)
        print(f"run {manifest.run_id}: {cfg.experiment} -> {cfg.out_dir}")
        for name in sorted(manifest.files):
            print(f"  {name}")
        return EXIT_OK
    except (ConfigurationError, DomainError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NHWalkError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
