"""Command-line entry point: run, enumerate-space, oracle, validate."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .exposure import format_label, space_sizes
from .harness import ConfigError, ExperimentConfig, run_grid, validate, write_outputs

EXIT_OK = 0
EXIT_INVALID = 2


def _load(path: str) -> ExperimentConfig:
    return ExperimentConfig.load(path)


def _report_issues(issues) -> bool:
    for issue in issues:
        print(str(issue), file=sys.stderr)
    return any(i.level == "error" for i in issues)


def cmd_run(args) -> int:
    config = _load(args.config).with_overrides(seed=args.seed, replications=args.reps)
    if _report_issues(validate(config)):
        return EXIT_INVALID
    grid = run_grid(config, workers=args.workers, keep_traces=args.traces)
    write_outputs(args.out, config, grid)
    for T, T1, agg in grid.points:
        print(f"T={T} T1={T1} regret={agg.mean_regret:.6g} (se {agg.se_regret:.3g}) "
              f"error={agg.mean_error:.6g} (se {agg.se_error:.3g})")
    for name, fit in grid.slopes.items():
        print(f"slope {name}: {fit['slope']:.4f} (r2 {fit['r2']:.3f})")
    return EXIT_OK


def cmd_enumerate(args) -> int:
    config = _load(args.config)
    sizes = space_sizes(config.mapping, config.network, config.clustering, config.k, config.budget)
    space = config.space()
    payload = {
        "U_C": sizes["U_C"],
        "U_O": sizes["U_O"],
        "U_E": len(space),
        "arms": [[format_label(x) for x in arm] for arm in space.arms],
    }
    print(json.dumps(payload))
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = _load(args.config)
    T = args.T if args.T is not None else config.grid_points()[0][0]
    space = config.space()
    report = config.build_report(config.build_instance(T), space)
    print(json.dumps(report.to_json(space)))
    return EXIT_OK


def cmd_validate(args) -> int:
    config = _load(args.config)
    issues = validate(config)
    if _report_issues(issues):
        return EXIT_INVALID
    print("ok")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netbandit", description="Online experiments under network interference.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run replications and write CSV/JSON outputs")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--seed", type=int)
    run.add_argument("--reps", type=int)
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--traces", action="store_true", help="write per-round trace files")
    run.set_defaults(func=cmd_run)

    enum = sub.add_parser("enumerate-space", help="print U_C, U_O, U_E sizes and the exposure arms")
    enum.add_argument("--config", required=True)
    enum.set_defaults(func=cmd_enumerate)

    oracle = sub.add_parser("oracle", help="print exact exposure means, best arm and ATE matrix")
    oracle.add_argument("--config", required=True)
    oracle.add_argument("--T", type=int, help="horizon used to resolve T-dependent instances")
    oracle.set_defaults(func=cmd_oracle)

    val = sub.add_parser("validate", help="check preconditions without running")
    val.add_argument("--config", required=True)
    val.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
