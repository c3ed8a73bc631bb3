"""Command-line front end.

    coherence-transfer <subcommand> [--config PATH] [--out PATH]
                       [--format csv|json] [--seed N] [--jobs N] [flags...]

Exit codes: 0 success, 1 validation error, 2 solver failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import runner

SUBCOMMANDS = {
    "onequbit": "one-qubit",
    "twoqubit": "two-qubit",
    "triangle": "triangle",
    "dqd": "dqd",
    "lp-selftest": "lp-selftest",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config; its keys override the flags")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=runner.FORMATS)
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int, default=1, help="worker count; never changes the output")

    ap = _Parser(prog="coherence-transfer", description="Coherence-transfer certification on simulated networks.")
    ap.add_argument("--version", action="version", version=runner.tool_version())
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("onequbit", "twoqubit"):
        p = sub.add_parser(name, parents=[common])
        p.add_argument("--network", type=int)
        p.add_argument("--checkpoint", type=int)
        p.add_argument("--visibilities", type=float, nargs="+")
        p.add_argument("--oracle-trials", dest="oracle_trials", type=int)
        if name == "onequbit":
            p.add_argument("--rsp", type=int)
        else:
            p.add_argument("--variant", choices=("capable", "control"))

    p = sub.add_parser("triangle", parents=[common])
    p.add_argument("--restarts", type=int)

    p = sub.add_parser("dqd", parents=[common])
    for flag in ("gamma-l", "gamma-r", "delta", "t0-max", "tau-max", "dt"):
        p.add_argument(f"--{flag}", dest=flag.replace("-", "_"), type=float)
    p.add_argument("--points", type=int)

    p = sub.add_parser("lp-selftest", parents=[common])
    p.add_argument("--cases", type=int)
    p.add_argument("--max-vars", dest="max_vars", type=int)
    return ap


_NOT_CONFIG = {"command", "config", "jobs"}


def _raw_config(args) -> dict:
    scenario = SUBCOMMANDS[args.command]
    raw = {"scenario": scenario}
    for key, value in vars(args).items():
        if key not in _NOT_CONFIG and value is not None:
            raw[key] = value
    if args.config:
        try:
            text = Path(args.config).read_text(encoding="utf-8")
        except OSError as exc:
            raise runner.ConfigError(f"config: cannot read {args.config}: {exc.strerror}") from None
        cfg = runner.parse_config(text)
        if cfg.scenario != scenario:
            raise runner.ConfigError(f"scenario: config says {cfg.scenario!r} but subcommand is {args.command!r}")
        file_raw = cfg.to_dict()
        # only keys the file actually set override flags; defaults do not
        explicit = json.loads(text)
        raw.update({k: v for k, v in file_raw.items() if k in explicit})
    return raw


def _needs_seed(raw: dict) -> bool:
    return raw["scenario"] == "triangle" or bool(raw.get("oracle_trials"))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise runner.ConfigError(f"jobs: must be >= 1, got {args.jobs}")
        raw = _raw_config(args)
        if _needs_seed(raw) and "seed" not in raw:
            raise runner.ConfigError("seed: required for stochastic runs (pass --seed or set it in the config)")
        config = runner.config_from_dict(raw)
        result = runner.run(config, n_jobs=args.jobs)
    except runner.ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except runner.SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2

    text = runner.json_text(result) if config.format == "json" else runner.csv_text(result)
    if config.out:
        try:
            Path(config.out).write_text(text, encoding="utf-8", newline="")
        except OSError as exc:
            print(f"error: cannot write {config.out}: {exc.strerror}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
