"""Command-line entry point.

Subcommands: schedule, train, bench, budget, sweep. Exit codes: 0 success,
1 config/domain error, 2 I/O error, 3 numeric abort.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from .config import ExperimentConfig, parse_config, parse_config_text, serialize_config
from .harness import (
    alpha_beta_sweep,
    bench_matrix,
    budget_to_target,
    train_run,
    write_metrics_csv,
)
from .nn import NumericError, save_checkpoint
from .report import emit_tables
from .svg import render_run_svg, render_schedule_svg

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_NUMERIC = 3


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file (defaults apply if omitted)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, help="override train.seed")
    common.add_argument(
        "--threads",
        type=int,
        default=None,
        help="parallel runs for bench/budget/sweep (or PRUNE_LAB_THREADS)",
    )
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="prune-lab",
        description="Sparse-training lab: one-cycle and baseline pruning schedules.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("schedule", parents=[common], help="render schedule curves as SVG")
    p.add_argument("--resolution", type=int, help="samples per curve")
    sub.add_parser("train", parents=[common], help="train one run, emit metrics and plots")
    sub.add_parser("bench", parents=[common], help="fixed-budget schedule comparison")
    p = sub.add_parser("budget", parents=[common], help="budget to reach a target accuracy")
    p.add_argument("--target", type=float, help="target eval accuracy in [0,1)")
    sub.add_parser("sweep", parents=[common], help="one-cycle alpha/beta grid sweep")
    return parser


def _load_config(args) -> ExperimentConfig:
    cfg = parse_config(args.config) if args.config else parse_config_text("")
    if args.seed is not None:
        cfg.values["train"]["seed"] = args.seed
        cfg.provenance["train.seed"] = "cli"
    return cfg


def _threads(args) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("PRUNE_LAB_THREADS")
    return max(1, int(env)) if env else 1


def _say(args, message: str) -> None:
    if not args.quiet:
        print(message)


def _cmd_schedule(args, cfg: ExperimentConfig, out: Path) -> int:
    resolution = args.resolution or cfg.values["experiment"]["resolution"]
    specs = cfg.experiment_schedules()
    path = out / "schedules.svg"
    render_schedule_svg(specs, resolution, path)
    _say(args, f"wrote {path}")
    return EXIT_OK


def _cmd_train(args, cfg: ExperimentConfig, out: Path) -> int:
    result = train_run(cfg.run_config(), keep_network=True)
    write_metrics_csv([result], out / "metrics.csv")
    save_checkpoint(result.network, out / "network.json")
    (out / "config.toml").write_text(serialize_config(cfg))
    if result.failed:
        _say(args, f"run aborted: {result.diagnostic}")
        return EXIT_NUMERIC
    for metric in ("accuracy", "sparsity", "lr"):
        render_run_svg([result], metric, out / f"{metric}.svg")
    _say(
        args,
        f"final accuracy {result.final_accuracy:.4f}, "
        f"final sparsity {result.final_sparsity:.4f} ({out}/metrics.csv)",
    )
    return EXIT_OK


def _cmd_bench(args, cfg: ExperimentConfig, out: Path) -> int:
    exp = cfg.values["experiment"]
    base = cfg.run_config()
    table = bench_matrix(
        base, cfg.experiment_schedules(), exp["sparsities"], exp["seeds"],
        threads=_threads(args),
    )
    runs = [r for cell in table for r in cell.pop("runs")]
    write_metrics_csv(runs, out / "bench_metrics.csv")
    csv_path, json_path = emit_tables(table, out, "bench")
    _say(args, f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _cmd_budget(args, cfg: ExperimentConfig, out: Path) -> int:
    exp = cfg.values["experiment"]
    target = args.target if args.target is not None else exp["target_accuracy"]
    rows = budget_to_target(
        cfg.run_config(),
        cfg.experiment_schedules(),
        target_accuracy=target,
        max_epochs=exp["max_epochs"],
        seeds=exp["seeds"],
        increment=exp["increment"],
        threads=_threads(args),
    )
    csv_path, json_path = emit_tables(rows, out, "budget")
    _say(args, f"wrote {csv_path} and {json_path}")
    return EXIT_OK


def _cmd_sweep(args, cfg: ExperimentConfig, out: Path) -> int:
    exp = cfg.values["experiment"]
    base = cfg.run_config()
    base = replace(base, schedule=cfg.schedule_spec(kind="one_cycle"))
    grid = alpha_beta_sweep(
        base, exp["alphas"], exp["betas"], exp["seeds"], threads=_threads(args)
    )
    csv_path, json_path = emit_tables(grid, out, "sweep")
    _say(args, f"wrote {csv_path} and {json_path}")
    return EXIT_OK


_COMMANDS = {
    "schedule": _cmd_schedule,
    "train": _cmd_train,
    "bench": _cmd_bench,
    "budget": _cmd_budget,
    "sweep": _cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_config(args)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        return _COMMANDS[args.command](args, cfg, out)
    except NumericError as exc:
        print(f"numeric abort: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
