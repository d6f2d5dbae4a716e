"""Desk-scale sparse-training lab.

Core pieces: sparsity schedules (one-cycle plus one-shot / iterative / AGP
baselines), global magnitude pruning with monotone masks, a small dense
network trained with momentum SGD under a 1cycle learning rate, benchmark
protocols, and a sklearn-style estimator wrapper.
"""

from .data import Dataset, gen_synthetic, load_csv_dataset, load_idx
from .estimator import PrunedMLPClassifier
from .harness import (
    MetricsRecord,
    RunConfig,
    RunResult,
    alpha_beta_sweep,
    bench_matrix,
    budget_to_target,
    train_run,
    write_metrics_csv,
)
from .nn import LrSchedule, Network, init_network, load_checkpoint, lr_at, save_checkpoint
from .pruning import Mask, PruneState, actual_sparsity, apply_mask, rank_global, update_mask
from .schedule import ScheduleKind, ScheduleSpec, SparsityTrace, sparsity_at, trace

__all__ = [
    "Dataset",
    "LrSchedule",
    "Mask",
    "MetricsRecord",
    "Network",
    "PruneState",
    "PrunedMLPClassifier",
    "RunConfig",
    "RunResult",
    "ScheduleKind",
    "ScheduleSpec",
    "SparsityTrace",
    "actual_sparsity",
    "alpha_beta_sweep",
    "apply_mask",
    "bench_matrix",
    "budget_to_target",
    "gen_synthetic",
    "init_network",
    "load_checkpoint",
    "load_csv_dataset",
    "load_idx",
    "lr_at",
    "rank_global",
    "save_checkpoint",
    "sparsity_at",
    "trace",
    "train_run",
    "update_mask",
    "write_metrics_csv",
]

__version__ = "0.1.0"
