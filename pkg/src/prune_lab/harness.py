"""Training loop and the three benchmark protocols.

Protocols: fixed-budget comparison of schedules (bench_matrix),
budget-to-target-accuracy (budget_to_target), and the alpha/beta grid
sweep (alpha_beta_sweep). Every run is deterministic given (config, seed)
and owns its PRNG, so the drivers may run them in parallel without
changing any result.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .data import Dataset
from .nn import (
    LrSchedule,
    Network,
    NnError,
    NumericError,
    SgdState,
    forward,
    init_network,
    loss_and_backward,
    lr_at,
    sgd_step,
)
from .pruning import Mask, PruneEvent, PruneState, actual_sparsity, apply_mask, update_mask
from .schedule import ScheduleKind, ScheduleSpec, sparsity_at

METRICS_COLUMNS = [
    "run_id",
    "schedule",
    "sparsity_target",
    "alpha",
    "beta",
    "seed",
    "epoch",
    "step",
    "lr",
    "target_sparsity",
    "actual_sparsity",
    "train_loss",
    "eval_accuracy",
]


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class RunConfig:
    dataset: Dataset
    layer_dims: tuple[int, ...]
    schedule: ScheduleSpec
    epochs: int = 60
    batch_size: int = 64
    lr: LrSchedule = LrSchedule()
    momentum: float = 0.9
    prune_every: int = 0  # 0 = once per epoch
    seed: int = 0

    def validate(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs: must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size: must be >= 1, got {self.batch_size}")
        if len(self.layer_dims) < 2:
            raise ConfigError(f"layer_dims: need >= 2 dims, got {list(self.layer_dims)}")
        if self.layer_dims[0] != self.dataset.input_dim:
            raise ConfigError(
                f"layer_dims[0]={self.layer_dims[0]} does not match dataset "
                f"input dim {self.dataset.input_dim}"
            )
        if self.layer_dims[-1] != self.dataset.class_count:
            raise ConfigError(
                f"layer_dims[-1]={self.layer_dims[-1]} does not match class "
                f"count {self.dataset.class_count}"
            )
        if self.prune_every < 0:
            raise ConfigError(f"prune_every: must be >= 0, got {self.prune_every}")

    @property
    def steps_per_epoch(self) -> int:
        return math.ceil(len(self.dataset.train_idx) / self.batch_size)

    @property
    def total_steps(self) -> int:
        return self.epochs * self.steps_per_epoch


@dataclass(frozen=True)
class MetricsRecord:
    epoch: int
    step: int
    lr: float
    target_sparsity: float
    actual_sparsity: float
    train_loss: float
    eval_accuracy: float


@dataclass
class RunResult:
    config: RunConfig
    records: list[MetricsRecord]
    final_accuracy: float
    final_sparsity: float
    prune_events: list[PruneEvent]
    wall_time: float
    network: Network | None = None
    failed: bool = False
    diagnostic: str = ""


def evaluate_accuracy(net: Network, mask: Mask | None, x: np.ndarray, y: np.ndarray) -> float:
    logits, _ = forward(net, x, mask)
    return float(np.mean(np.argmax(logits, axis=1) == y))


def train_run(config: RunConfig, keep_network: bool = False) -> RunResult:
    """Train one network under one schedule for the full budget.

    Progress t = steps_done / total_steps drives both the LR and the pruning
    clock; the mask is refreshed every prune_every steps and again at each
    epoch boundary (so per-epoch records stay within 1/total_count of the
    schedule), ending with a final update at t = 1.
    """
    config.validate()
    start = time.perf_counter()
    ds = config.dataset
    net = init_network(list(config.layer_dims), config.seed)
    sgd = SgdState.for_network(net, config.momentum)
    state = PruneState(Mask.full_keep(net), config.schedule)

    shuffle_rng = np.random.Generator(np.random.PCG64(config.seed))
    x_train, y_train = ds.x_train, ds.y_train
    n_train = len(y_train)
    spe = config.steps_per_epoch
    total_steps = config.total_steps
    prune_every = config.prune_every if config.prune_every > 0 else spe

    def prune_now(progress: float, step: int) -> None:
        _, event = update_mask(state, net, progress, step)
        if event is not None:
            apply_mask(net, state.mask)

    records: list[MetricsRecord] = []
    step = 0
    try:
        for epoch in range(1, config.epochs + 1):
            perm = shuffle_rng.permutation(n_train)
            epoch_losses = []
            for b in range(spe):
                t = step / total_steps
                lr = lr_at(config.lr, t)
                if step % prune_every == 0:
                    prune_now(t, step)
                idx = perm[b * config.batch_size : (b + 1) * config.batch_size]
                logits, cache = forward(net, x_train[idx], state.mask)
                loss, grads = loss_and_backward(net, cache, y_train[idx], state.mask)
                if not math.isfinite(loss):
                    raise NumericError(f"non-finite loss at step {step}")
                sgd_step(net, grads, sgd, lr, state.mask)
                epoch_losses.append(loss)
                step += 1
            # epoch-boundary mask refresh; t=1.0 exactly at the last epoch
            t = step / total_steps
            prune_now(t, step)
            records.append(
                MetricsRecord(
                    epoch=epoch,
                    step=step,
                    lr=lr_at(config.lr, t),
                    target_sparsity=sparsity_at(config.schedule, t),
                    actual_sparsity=actual_sparsity(state.mask),
                    train_loss=float(np.mean(epoch_losses)),
                    eval_accuracy=evaluate_accuracy(net, state.mask, ds.x_eval, ds.y_eval),
                )
            )
    except NumericError as exc:
        return RunResult(
            config=config,
            records=records,
            final_accuracy=float("nan"),
            final_sparsity=actual_sparsity(state.mask),
            prune_events=state.events,
            wall_time=time.perf_counter() - start,
            network=net if keep_network else None,
            failed=True,
            diagnostic=str(exc),
        )

    return RunResult(
        config=config,
        records=records,
        final_accuracy=records[-1].eval_accuracy,
        final_sparsity=records[-1].actual_sparsity,
        prune_events=state.events,
        wall_time=time.perf_counter() - start,
        network=net if keep_network else None,
    )


def run_many(configs: list[RunConfig], threads: int = 1) -> list[RunResult]:
    """Run independent configs, optionally in parallel; output order matches input."""
    if threads <= 1:
        return [train_run(c) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(train_run, configs))


def _aggregate(results: list[RunResult]) -> tuple[float, float, int, list[int]]:
    """Mean/std of final accuracy in percent over successful runs.

    Returns (mean, sample std, n_ok, failed seed list); failed runs are
    excluded from the aggregate but flagged.
    """
    ok = [r for r in results if not r.failed]
    failed_seeds = [r.config.seed for r in results if r.failed]
    if not ok:
        return float("nan"), float("nan"), 0, failed_seeds
    accs = np.array([r.final_accuracy for r in ok]) * 100.0
    std = float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0
    return float(np.mean(accs)), std, len(accs), failed_seeds


def bench_matrix(
    base: RunConfig,
    schedules: list[ScheduleSpec],
    sparsities: list[float],
    seeds: list[int],
    threads: int = 1,
) -> list[dict]:
    """Fixed-budget cross product: every (schedule, sparsity, seed) run with
    the identical step budget; one aggregate cell per (schedule, sparsity)."""
    if not schedules or not sparsities or not seeds:
        raise ConfigError("schedules, sparsities and seeds must be non-empty")
    cells = [(spec, s_f) for spec in schedules for s_f in sparsities]
    configs = [
        replace(base, schedule=replace(spec, s_f=s_f), seed=seed)
        for spec, s_f in cells
        for seed in seeds
    ]
    results = run_many(configs, threads)
    table = []
    for i, (spec, s_f) in enumerate(cells):
        chunk = results[i * len(seeds) : (i + 1) * len(seeds)]
        mean, std, n_ok, failed = _aggregate(chunk)
        table.append(
            {
                "schedule": spec.kind.value,
                "sparsity": s_f,
                "mean_acc": mean,
                "std_acc": std,
                "n_seeds": n_ok,
                "failed_seeds": failed,
                "runs": chunk,
            }
        )
    return table


def _stretch_config(base: RunConfig, spec: ScheduleSpec, epochs: int) -> RunConfig:
    """Extend the budget to `epochs`, keeping the pretraining phase and the
    LR warmup fixed in absolute steps; only the fine-tuning tail stretches."""
    scale = base.epochs / epochs
    new_spec = spec
    if spec.kind is not ScheduleKind.ONE_CYCLE and spec.pretrain_fraction > 0:
        new_spec = spec.with_pretrain_fraction(spec.pretrain_fraction * scale)
    new_lr = replace(base.lr, warmup_fraction=base.lr.warmup_fraction * scale)
    return replace(base, schedule=new_spec, lr=new_lr, epochs=epochs)


def budget_to_target(
    base: RunConfig,
    schedules: list[ScheduleSpec],
    target_accuracy: float,
    max_epochs: int,
    seeds: list[int] | None = None,
    increment: float = 0.25,
    threads: int = 1,
) -> list[dict]:
    """Smallest training budget per schedule to reach target eval accuracy.

    Budgets grow from base.epochs in `increment`-of-base steps. Budgets are
    reported relative to One-Cycle's, which is 1x by construction.
    """
    if not (0.0 <= target_accuracy < 1.0):
        raise ConfigError(f"target_accuracy: must be in [0, 1), got {target_accuracy}")
    if max_epochs < base.epochs:
        raise ConfigError("max_epochs must be >= base.epochs")
    seeds = seeds if seeds is not None else [base.seed]

    budgets = [base.epochs]
    while budgets[-1] < max_epochs:
        budgets.append(min(budgets[-1] + max(1, math.ceil(increment * base.epochs)), max_epochs))

    rows = []
    for spec in schedules:
        found = None
        for epochs in budgets:
            cfg = _stretch_config(base, spec, epochs)
            results = run_many([replace(cfg, seed=s) for s in seeds], threads)
            ok = [r for r in results if not r.failed]
            acc = float(np.mean([r.final_accuracy for r in ok])) if ok else float("nan")
            if acc >= target_accuracy:
                found = epochs
                break
        rows.append(
            {
                "schedule": spec.kind.value,
                "budget_epochs": found,
                "budget_steps": found * base.steps_per_epoch if found else None,
                "reached": found is not None,
            }
        )

    one_cycle = next(
        (r for r in rows if r["schedule"] == ScheduleKind.ONE_CYCLE.value and r["reached"]),
        None,
    )
    for row in rows:
        if one_cycle is not None and row["reached"]:
            row["relative_budget"] = row["budget_epochs"] / one_cycle["budget_epochs"]
        else:
            row["relative_budget"] = None  # rendered as ">max" when not reached
    return rows


def alpha_beta_sweep(
    base: RunConfig,
    alphas: list[float],
    betas: list[float],
    seeds: list[int],
    threads: int = 1,
) -> list[dict]:
    """One-Cycle alpha x beta grid at fixed sparsity; one cell per pair."""
    if not alphas or not betas or not seeds:
        raise ConfigError("alphas, betas and seeds must be non-empty")
    if base.schedule.kind is not ScheduleKind.ONE_CYCLE:
        raise ConfigError("alpha_beta_sweep requires a ONE_CYCLE base schedule")
    cells = [(a, b) for a in alphas for b in betas]
    configs = [
        replace(base, schedule=replace(base.schedule, alpha=a, beta=b), seed=seed)
        for a, b in cells
        for seed in seeds
    ]
    results = run_many(configs, threads)
    grid = []
    for i, (a, b) in enumerate(cells):
        chunk = results[i * len(seeds) : (i + 1) * len(seeds)]
        mean, std, n_ok, failed = _aggregate(chunk)
        grid.append(
            {
                "schedule": ScheduleKind.ONE_CYCLE.value,
                "alpha": a,
                "beta": b,
                "sparsity": base.schedule.s_f,
                "mean_acc": mean,
                "std_acc": std,
                "n_seeds": n_ok,
                "failed_seeds": failed,
            }
        )
    return grid


def run_id_for(result: RunResult) -> str:
    c = result.config
    return f"{c.schedule.kind.value}-sf{c.schedule.s_f}-seed{c.seed}"


def write_metrics_csv(results: list[RunResult], path: str | Path) -> None:
    """Per-epoch metrics for one or more runs, one row per (run, epoch).

    Float cells use repr, so identical runs produce byte-identical files.
    """
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(METRICS_COLUMNS)
        for result in results:
            c = result.config
            for rec in result.records:
                writer.writerow(
                    [
                        run_id_for(result),
                        c.schedule.kind.value,
                        repr(c.schedule.s_f),
                        repr(c.schedule.alpha),
                        repr(c.schedule.beta),
                        c.seed,
                        rec.epoch,
                        rec.step,
                        repr(rec.lr),
                        repr(rec.target_sparsity),
                        repr(rec.actual_sparsity),
                        repr(rec.train_loss),
                        repr(rec.eval_accuracy),
                    ]
                )
