"""Command-line entry point.

Subcommands:
  run           execute an experiment spec, writing results and traces
  validate      check a scenario file, printing every violation
  dump-qtables  train and run one block, dumping the learned tables
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .env import NetworkEnv, PayoffWeights
from .experiment import (
    emit_results,
    emit_traces,
    load_experiment_spec,
    parse_experiment_spec,
    resolve_scheduled_ues,
    run_block_trial,
    run_experiment,
    validate_experiment_spec,
)
from .qlearning import PowerLevels
from .scenario import load_scenario, validate_scenario


def _cmd_run(args) -> int:
    path = Path(args.spec)
    if not path.exists():
        print(f"error: spec file not found: {path}", file=sys.stderr)
        return 1
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        print(f"error: {path}: not valid JSON: {exc}", file=sys.stderr)
        return 1
    if args.trials is not None:
        data["trials"] = args.trials
    if args.seed is not None:
        data["seed"] = args.seed
    if args.mode is not None:
        data["mode"] = args.mode
    errors = validate_experiment_spec(data, base_dir=path.parent)
    if errors:
        for e in errors:
            print(f"error: {path}: {e}", file=sys.stderr)
        return 1
    spec = parse_experiment_spec(data, base_dir=path.parent)

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        result = run_experiment(spec, collect_traces=not args.no_traces)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    written = []
    try:
        if args.format in ("csv", "both"):
            written.append(emit_results(result.records, "csv", out_dir / "results.csv"))
        if args.format in ("json", "both"):
            written.append(emit_results(result.records, "json", out_dir / "summary.json"))
        if not args.no_traces:
            trace_name = "traces.csv" if spec.mode == "block" else "frames.csv"
            written.append(emit_traces(result, out_dir / trace_name))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in written:
        print(p)
    return 0


def _cmd_validate(args) -> int:
    path = Path(args.scenario)
    if not path.exists():
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        return 1
    errors = validate_scenario(path.read_text())
    if errors:
        for e in errors:
            print(f"error: {path}: {e}", file=sys.stderr)
        return 1
    print(f"{path}: ok")
    return 0


def _cmd_dump_qtables(args) -> int:
    path = Path(args.scenario)
    if not path.exists():
        print(f"error: scenario file not found: {path}", file=sys.stderr)
        return 1
    try:
        config = load_scenario(path)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    env = NetworkEnv(config)
    try:
        sched = resolve_scheduled_ues(config, args.scheduled_ue)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    power_levels = PowerLevels(config.p_max_w, args.power_levels)
    weights = PayoffWeights.uniform(
        config.n_bs, args.throughput_weight, args.power_cost_weight
    )
    _, agents = run_block_trial(
        env,
        "learner",
        sched,
        power_levels,
        args.interference_states,
        weights,
        args.seed,
        training_frames=args.training_frames,
    )

    lines = []
    for i, agent in enumerate(agents):
        for ue, table in sorted(agent.tables.items()):
            lines.append(f"# BS {i}, UE {ue}  (rows: power W, columns: interference state)")
            header = ["power_w"] + [f"state_{s}" for s in range(table.shape[1])]
            lines.append(",".join(header))
            for a in range(table.shape[0]):
                cells = [f"{power_levels.levels[a]!r}"] + [f"{v!r}" for v in table[a]]
                lines.append(",".join(cells))
            lines.append("")
    text = "\n".join(lines)
    if args.out:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            print(f"error: failed to write {args.out}: {exc}", file=sys.stderr)
            return 1
        print(args.out)
    else:
        print(text, end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beamsched",
        description="Distributed beam scheduling and power allocation simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment spec")
    run.add_argument("spec", help="experiment spec JSON path")
    run.add_argument("--out", required=True, help="output directory")
    run.add_argument("--format", choices=("csv", "json", "both"), default="both")
    run.add_argument("--trials", type=int, default=None, help="override trial count")
    run.add_argument("--seed", type=int, default=None, help="override base seed")
    run.add_argument("--mode", choices=("block", "lyapunov"), default=None)
    run.add_argument("--no-traces", action="store_true", help="skip trace emission")
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="validate a scenario file")
    val.add_argument("scenario", help="scenario JSON path")
    val.set_defaults(func=_cmd_validate)

    dump = sub.add_parser("dump-qtables", help="train, run one block and dump Q-tables")
    dump.add_argument("scenario", help="scenario JSON path")
    dump.add_argument("--out", default=None, help="output file (stdout when omitted)")
    dump.add_argument("--seed", type=int, default=1)
    dump.add_argument("--power-levels", type=int, default=10)
    dump.add_argument("--interference-states", type=int, default=10)
    dump.add_argument("--scheduled-ue", type=int, default=1)
    dump.add_argument("--throughput-weight", type=float, default=1.0)
    dump.add_argument("--power-cost-weight", type=float, default=0.0)
    dump.add_argument("--training-frames", type=int, default=100)
    dump.set_defaults(func=_cmd_dump_qtables)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
