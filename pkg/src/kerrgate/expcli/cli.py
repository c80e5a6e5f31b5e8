"""Command-line entry point: ``kerrgate <subcommand> [--config FILE] [overrides]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from .. import __version__
from ..fockcore import FockError
from .config import OUTPUT_ENV, ConfigError, ExperimentConfig, load_config
from .props import run_property_suite
from .runners import run

SUBCOMMANDS = {
    "self-kerr": "self_kerr",
    "cross-kerr": "cross_kerr",
    "control-z": "control_z",
    "scaling": "scaling",
    "bound-check": "bound_check",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kerrgate",
        description="Simulate qubit-mediated Kerr gates and write JSON/CSV results.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, help="JSON config; flags below override its keys")
        p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./kerrgate-out)")
        p.add_argument("--tau", type=float, help="coupling strength per pulse")
        p.add_argument("--eta", type=float, help="per-cycle transmittance of the loss channel")
        p.add_argument("--nmax", type=int, help="Fock truncation per mode")
        p.add_argument("--threads", type=int, help="worker threads for independent T points")
    p = sub.add_parser("props", help="run the seeded invariant suite")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help=f"output directory (default: ${OUTPUT_ENV} or ./kerrgate-out)")
    return parser


def resolve_config(args) -> ExperimentConfig:
    experiment = SUBCOMMANDS[args.command]
    if args.config is not None:
        cfg = load_config(args.config)
        if cfg.experiment != experiment:
            raise ConfigError(f"{args.config}: experiment is {cfg.experiment!r}, subcommand wants {experiment!r}")
    else:
        cfg = ExperimentConfig.from_dict({"experiment": experiment})
    return cfg.override(output_dir=args.out, tau=args.tau, eta=args.eta, n_max=args.nmax, threads=args.threads)


def _run_props(args) -> int:
    import os

    out = Path(args.out or os.environ.get(OUTPUT_ENV, "kerrgate-out"))
    t0 = time.perf_counter()
    results = run_property_suite(args.seed)
    passed = all(r["passed"] for r in results.values())
    report = {
        "experiment": "props",
        "version": __version__,
        "config": {"seed": args.seed},
        "checks": [{"name": k, **v} for k, v in results.items()],
        "passed": passed,
        "timing": {"wall_s": time.perf_counter() - t0},
    }
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    for name, r in results.items():
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {name}  ({r['value']:.3g} {r['expected']})")
    return 0 if passed else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.command == "props":
        return _run_props(args)
    try:
        cfg = resolve_config(args)
        report = run(cfg)
    except (ConfigError, FockError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    for c in report.checks:
        value = "" if c.value is None else f"  ({c.value:.6g}, want {c.expected})"
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}{value}")
    print(f"wrote {cfg.output_path / 'report.json'}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
