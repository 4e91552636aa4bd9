"""Command-line front end.

Exit codes: 0 success, 1 a check failed, 2 bad config or arguments,
3 network has unreachable origin/destination pairs.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import report
from .config import PRESETS, UnreachableError, load_config, load_network
from .equity import check_perfect_equity
from .network import validate_network
from .planner import STRATEGIES
from .sim import ConfigError, run

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_UNREACHABLE = 0, 1, 2, 3


def _setup_logging() -> None:
    level = os.environ.get("EQUIROUTE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _meta(cfg, seed: int) -> dict:
    return {"seed": seed, "config_digest": cfg.digest(seed), "vehicles": sum(n for _, n in cfg.scenario_config.counts)}


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    strategy = args.strategy or cfg.strategy
    results = run(cfg.scenario(seed), strategy)
    out = _out_dir(args.out)
    summary = {"meta": _meta(cfg, seed), **results.summary()}
    report.write_json(out / f"summary_{strategy}.json", summary)
    report.write_text(out / f"vehicles_{strategy}.csv", results.csv_text())
    dte = results.fleet_dte
    print(f"{strategy}: fleet DTE {'n/a' if dte is None else f'{dte:.6f}'}, "
          f"{len(results.completed)} completed, {len(results.failed)} failed -> {out}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    scenario = cfg.scenario(seed)
    results = {s: run(scenario, s) for s in STRATEGIES}
    out = _out_dir(args.out)
    doc = report.comparison_report(results, _meta(cfg, seed))
    report.write_json(out / "comparison.json", doc)
    for name, r in results.items():
        report.write_text(out / f"vehicles_{name}.csv", r.csv_text())
    report.write_text(out / "dtx_by_mode.csv", report.dtx_by_mode_csv(results))
    report.write_text(out / "trip_time_by_mode.csv", report.trip_time_by_mode_csv(results))
    for name, r in results.items():
        dte = r.fleet_dte
        print(f"{name:>6}: fleet DTE {'n/a' if dte is None else f'{dte:.6f}'}")
    return EXIT_OK


def cmd_check_equity(args) -> int:
    cfg = load_config(args.config)
    tol = cfg.tolerance if args.tolerance is None else args.tolerance
    check = check_perfect_equity(cfg.scenario_config.modes, tol)
    for mode, value in check.values.items():
        print(f"{mode:>12}: free-flow DTX {value:.6f}")
    print(f"max gap {check.gap:.6g} at tolerance {tol:g}: {'holds' if check.holds else 'fails'}")
    return EXIT_OK if check.holds else EXIT_CHECK


def cmd_gen_network(args) -> int:
    if args.kind == "line":
        if args.nodes < 2:
            raise ConfigError("--nodes must be >= 2")
        net = PRESETS["line"](args.nodes)
    elif args.kind == "grid":
        if args.cols < 1 or args.rows < 1:
            raise ConfigError("--cols and --rows must be positive")
        net = PRESETS["grid"](args.cols, args.rows, block_m=args.block_m)
    else:
        if args.cols < 1 or args.rows < 1:
            raise ConfigError("--cols and --rows must be positive")
        net = PRESETS["boston-like"](args.cols, args.rows, block_m=args.block_m, seed=args.seed)
    net.save(args.out)
    print(f"wrote {args.kind} network: {len(net.nodes)} nodes, {len(net.edges)} edges -> {args.out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.network:
        net = load_network(args.network, Path("."))
    else:
        net = load_config(args.config).network
    findings = validate_network(net)
    for f in findings:
        print(f)
    if not findings:
        print(f"ok: {len(net.nodes)} nodes, {len(net.edges)} edges")
        return EXIT_OK
    return EXIT_UNREACHABLE if all(f.kind == "unreachable" for f in findings) else EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="equiroute", description="Equity-aware dynamic route guidance simulator")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("run", help="simulate one strategy")
    sp.add_argument("--config", required=True)
    sp.add_argument("--strategy", choices=STRATEGIES)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="run psr, dsr and equity on one scenario")
    sp.add_argument("--config", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--out", default="out")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("check-equity", help="free-flow DTX per mode and the perfect-equity condition")
    sp.add_argument("--config", required=True)
    sp.add_argument("--tolerance", type=float)
    sp.set_defaults(func=cmd_check_equity)

    sp = sub.add_parser("gen-network", help="write a synthetic network file")
    sp.add_argument("--kind", choices=("boston-like", "grid", "line"), default="boston-like")
    sp.add_argument("--cols", type=int, default=9)
    sp.add_argument("--rows", type=int, default=5)
    sp.add_argument("--nodes", type=int, default=3)
    sp.add_argument("--block-m", type=float, default=250.0)
    sp.add_argument("--seed", type=int, default=2025)
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_gen_network)

    sp = sub.add_parser("validate", help="check a network for structural problems")
    group = sp.add_mutually_exclusive_group(required=True)
    group.add_argument("--config")
    group.add_argument("--network")
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if getattr(args, "seed", None) is not None and args.seed < 0:
        print("error: --seed must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except UnreachableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNREACHABLE
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
