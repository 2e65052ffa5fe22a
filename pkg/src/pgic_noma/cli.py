"""Command-line front end.

Exit codes: 0 success, 1 usage or config error (or an infeasible
allocation under ``validate``), 2 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .baselines import scheme2_solve, scheme3_allocate
from .config import DEFAULTS, ConfigError, config_from_dict, parse_config
from .model import (
    REGIME_LABELS,
    InvalidInputError,
    PowerAllocation,
    SolveResult,
    SolverConfig,
    validate_allocation,
    vsic_caps,
)
from .waterfill import alternate_solve

EXIT_OK, EXIT_USAGE, EXIT_IO = 0, 1, 2

SOLVERS = {1: alternate_solve, 2: scheme2_solve, 3: scheme3_allocate}

SWEEPS = {
    "power": (experiments.sweep_power, (10.0, 100.0, 10.0)),
    "gain": (experiments.sweep_gain, (1.0, 20.0, 1.0)),
    "prob": (experiments.sweep_prob, (0.0, 0.5, 0.05)),
    "asym": (experiments.sweep_asym, (0.1, 1.0, 0.1)),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def g6(v) -> str:
    if v is None:
        return "none"
    return "%.6g" % v


def _matrix(m: np.ndarray) -> str:
    return "; ".join(" ".join(g6(v) for v in row) for row in m)


def format_result(result: SolveResult, config: SolverConfig) -> list[str]:
    probs = config.probs.as_array()
    lines = [
        f"scheme={result.scheme}",
        f"rate_bps_hz={g6(result.ergodic_rate)}",
    ]
    for label, p, r in zip(REGIME_LABELS, probs, result.regime_rates):
        lines.append(f"regime_rate[{label}]={g6(r)} prob={g6(p)}")
    lines.append(f"P={_matrix(result.allocation.P)}")
    lines.append(f"Q={_matrix(result.allocation.Q)}")
    lines.append(f"water_level_tx1={g6(result.water_levels[0])}")
    lines.append(f"water_level_tx2={g6(result.water_levels[1])}")
    lines.append(f"kkt_residual={g6(result.kkt_residual)}")
    lines.append(f"outer_iterations={result.outer_iterations}")
    lines.append(f"converged={'true' if result.converged else 'false'}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pgic", description="Power allocation for the two-user parallel Gaussian interference channel.")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_config(p):
        p.add_argument("--config", type=Path, help="JSON config file (defaults when omitted)")

    p = sub.add_parser("solve", help="solve one scheme")
    p.add_argument("--scheme", type=int, choices=(1, 2, 3), required=True)
    add_config(p)

    p = sub.add_parser("sweep", help="run a parameter sweep over all schemes")
    p.add_argument("--kind", choices=sorted(SWEEPS), required=True)
    add_config(p)
    p.add_argument("--output-dir", type=Path, default=Path("."))
    p.add_argument("--svg", action="store_true", help="also write an SVG chart")
    p.add_argument("--lo", type=float)
    p.add_argument("--hi", type=float)
    p.add_argument("--step", type=float)
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)

    p = sub.add_parser("compare", help="run all three schemes on one config")
    add_config(p)

    p = sub.add_parser("validate", help="check a config, optionally an allocation against it")
    add_config(p)
    p.add_argument("--allocation", type=Path, help='JSON file {"P": [[...4], [...4]], "Q": [[...], [...]]}')
    return parser


def _load_config(path) -> SolverConfig:
    if path is None:
        return config_from_dict({})
    return parse_config(path)


def cmd_solve(args, out) -> int:
    config = _load_config(args.config)
    result = SOLVERS[args.scheme](config)
    for line in format_result(result, config):
        print(line, file=out)
    if not result.converged:
        print(f"warning: scheme {args.scheme} did not converge in {config.max_outer} iterations; "
              "reporting the best feasible iterate", file=sys.stderr)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    config = _load_config(args.config)
    results = [(k, SOLVERS[k](config)) for k in (1, 2, 3)]
    for k, r in sorted(results, key=lambda kr: -kr[1].ergodic_rate):
        print(f"scheme{k}_rate_bps_hz={g6(r.ergodic_rate)}", file=out)
    r1, r2, r3 = (r.ergodic_rate for _, r in results)
    for other, rate in ((2, r2), (3, r3)):
        if rate > 0:
            print(f"advantage_over_scheme{other}_pct={g6(100 * (r1 / rate - 1))}", file=out)
    for k, r in results:
        if not r.converged:
            print(f"warning: scheme {k} did not converge", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    config = _load_config(args.config)
    fn, (lo, hi, step) = SWEEPS[args.kind]
    lo = lo if args.lo is None else args.lo
    hi = hi if args.hi is None else args.hi
    step = step if args.step is None else args.step
    table = fn(lo, hi, step, base=config, workers=args.workers)

    args.output_dir.mkdir(parents=True, exist_ok=True)
    csv_path = args.output_dir / f"sweep_{args.kind}.csv"
    experiments.write_csv(table, csv_path)
    print(f"csv={csv_path}", file=out)
    if args.svg:
        svg_path = args.output_dir / f"sweep_{args.kind}.svg"
        experiments.render_svg(table, svg_path)
        print(f"svg={svg_path}", file=out)
    print(f"points={len(table.x_values)}", file=out)
    print(f"max_advantage_over_scheme2_pct={g6(table.max_advantage(2))}", file=out)
    print(f"max_advantage_over_scheme3_pct={g6(table.max_advantage(3))}", file=out)
    for x, flag in zip(table.x_values, table.flags):
        if flag:
            print(f"warning: x={g6(x)} {flag}", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args, out) -> int:
    config = _load_config(args.config)
    caps = vsic_caps(config.gains, config.sigma2, config.caps_mode)
    print("config=ok", file=out)
    print(f"p_cap={_matrix(caps.p_cap)}", file=out)
    print(f"q_cap={_matrix(caps.q_cap)}", file=out)
    if args.allocation is None:
        return EXIT_OK
    with open(args.allocation, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
            alloc = PowerAllocation(data["P"], data["Q"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise ConfigError("allocation", f"cannot read allocation from {args.allocation}: {exc}") from exc
    report = validate_allocation(alloc, caps, config)
    print(f"p_slack={g6(report.p_slack)}", file=out)
    print(f"q_slack={g6(report.q_slack)}", file=out)
    for line in report.describe():
        print(f"violation: {line}", file=out)
    print(f"feasible={'true' if report.feasible else 'false'}", file=out)
    return EXIT_OK if report.feasible else EXIT_USAGE


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "compare": cmd_compare, "validate": cmd_validate}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        print(f"pgic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, out)
    except InvalidInputError as exc:
        print(f"pgic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"pgic: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
