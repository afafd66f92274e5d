"""Command-line entry point: ``lightspan <subcommand> [flags]``.

Exit codes: 0 success, 2 configuration error, 3 certification failure
(including a greedy run that drops an edge of a certified instance),
4 base-graph generation failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from ..errors import (
    CertificationError,
    ConfigError,
    GenerationError,
    InvariantViolation,
    LightspanError,
    ParameterError,
    RegularizationError,
    StructuralError,
)
from . import experiments as ex
from .config import COMMANDS, load_config

EXIT_OK, EXIT_CONFIG, EXIT_CERT, EXIT_GEN = 0, 2, 3, 4


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lightspan", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key-value config file; flags override it")
        s.add_argument("--k", help="stretch parameter k >= 2")
        s.add_argument("--c", help="extra cycle length (montecarlo)")
        s.add_argument("--epsilon", action="append", help="unit fraction, repeatable or comma-separated")
        s.add_argument("--n-target", action="append", help="target spanning-cycle size, repeatable")
        s.add_argument("--base", action="append", help="base graph name:params, repeatable")
        s.add_argument("--seeds", help="e.g. 1,2,3 or 1-20")
        s.add_argument("--constant", action="append", metavar="NAME=VAL")
        s.add_argument("--trials", help="Monte Carlo trials per point and seed")
        s.add_argument("--chunk", help="Monte Carlo batch size")
        s.add_argument("--out", help="output directory (default $LIGHTSPAN_OUT or ./lightspan-out)")
        s.add_argument("--format", choices=("csv", "json"), help="write only this report format")
        s.add_argument("--workers", help="process pool size")
        s.add_argument("--name", help="report file stem")
        if name == "verify":
            s.add_argument("instance", nargs="?", help="instance .edges file (layout sidecar optional)")
    return p


def overrides_from_args(args) -> dict:
    raw = {"command": args.command}
    simple = {
        "k": args.k, "c": args.c, "seeds": args.seeds, "trials": args.trials, "chunk": args.chunk,
        "out": args.out, "format": args.format, "workers": args.workers, "name": args.name,
        "instance": getattr(args, "instance", None),
    }
    raw.update({k: v for k, v in simple.items() if v is not None})
    if args.epsilon:
        raw["epsilon"] = ",".join(args.epsilon)
    if args.n_target:
        raw["n_target"] = ",".join(args.n_target)
    if args.base:
        raw["base"] = ";".join(args.base)
    for item in args.constant or ():
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"--constant expects NAME=VAL, got {item!r}")
        raw[f"constant.{key.strip()}"] = val.strip()
    return raw


def _exit_for(exc: LightspanError) -> int:
    if isinstance(exc, (CertificationError, InvariantViolation)):
        return EXIT_CERT
    if isinstance(exc, (GenerationError, RegularizationError, StructuralError)):
        return EXIT_GEN
    if isinstance(exc, (ConfigError, ParameterError)):
        return EXIT_CONFIG
    return 1


def run(cfg) -> int:
    name = cfg.name or cfg.command
    if cfg.command == "generate":
        summaries, written = ex.generate(cfg)
        summary_path = cfg.out_dir / f"{name}.summary.json"
        summary_path.write_text(json.dumps({"config": cfg.echo(), "instances": summaries}, indent=2) + "\n")
        for s in summaries:
            print(f"{s['stem']}: {s['status']}" + (f" certificate={s['certificate']} > {s['threshold']}"
                                                  if s["status"] == "ok" else f" ({s['error']})"))
        return EXIT_CERT if any(s["status"] != "ok" for s in summaries) else EXIT_OK
    if cfg.command == "verify":
        report = ex.verify(cfg)
        print(json.dumps(report, indent=2))
        return EXIT_OK if report["pass"] else EXIT_CERT
    if cfg.command == "sweep":
        rows, agg, timings = ex.sweep(cfg)
        columns = ex.SWEEP_COLUMNS
    elif cfg.command == "compare":
        rows, agg, timings = ex.compare(cfg)
        columns = ex.COMPARE_COLUMNS
    else:
        rows, agg, timings = ex.montecarlo(cfg)
        columns = ex.MONTECARLO_COLUMNS
    for path in ex.write_report(cfg, name, columns, rows, agg, timings):
        print(path)
    brief = {k: v for k, v in agg.items() if not isinstance(v, (list, dict))}
    print(json.dumps(brief))
    if cfg.command == "compare" and any(r["error_code"] == "invariant" for r in rows):
        return EXIT_CERT
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, overrides_from_args(args))
        return run(cfg)
    except LightspanError as exc:
        code = _exit_for(exc)
        print(f"error: {exc}", file=sys.stderr)
        witness = getattr(exc, "witness", None)
        if witness is not None:
            print(json.dumps({"witness_edges": list(witness.edges), "value": str(exc.value)}), file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
