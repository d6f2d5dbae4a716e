"""Sparsity schedules: target sparsity as a function of training progress.

All evaluators are pure functions of (progress, spec). Progress is the
fraction of total optimizer steps completed, in [0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum


class ScheduleKind(Enum):
    ONE_CYCLE = "one_cycle"
    ONE_SHOT = "one_shot"
    ITERATIVE = "iterative"
    AGP = "agp"


# Pretraining offsets used by the baselines: the one-shot step happens at
# 40% of the budget, iterative and AGP start at 20%.
DEFAULT_ALPHA = 14.0
DEFAULT_BETA = 5.0
DEFAULT_PRETRAIN = {
    ScheduleKind.ONE_SHOT: 0.4,
    ScheduleKind.ITERATIVE: 0.2,
    ScheduleKind.AGP: 0.2,
}
DEFAULT_PRUNE_STEPS = 3


class ScheduleError(ValueError):
    """A schedule spec or evaluation argument is out of its domain."""


def default_pretrain_fraction(kind: ScheduleKind) -> float:
    return DEFAULT_PRETRAIN.get(kind, 0.0)


@dataclass(frozen=True)
class ScheduleSpec:
    """One pruning schedule: its kind plus every tuning knob.

    alpha/beta only matter for ONE_CYCLE, pretrain_fraction only for the
    baselines, n_prune_steps only for ITERATIVE; the rest are ignored.
    """

    kind: ScheduleKind
    s_i: float = 0.0
    s_f: float = 0.95
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    pretrain_fraction: float | None = None
    n_prune_steps: int = DEFAULT_PRUNE_STEPS

    def __post_init__(self):
        if self.pretrain_fraction is None:
            object.__setattr__(
                self, "pretrain_fraction", default_pretrain_fraction(self.kind)
            )
        self.validate()

    def validate(self) -> None:
        if not isinstance(self.kind, ScheduleKind):
            raise ScheduleError(f"kind: not a ScheduleKind: {self.kind!r}")
        for name in ("s_i", "s_f"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ScheduleError(f"{name}: must be in [0, 1], got {v}")
        if self.s_i > self.s_f:
            raise ScheduleError(f"s_f: must be >= s_i, got s_i={self.s_i} > s_f={self.s_f}")
        if not self.alpha > 0.0:
            raise ScheduleError(f"alpha: must be > 0, got {self.alpha}")
        if not math.isfinite(self.beta):
            raise ScheduleError(f"beta: must be finite, got {self.beta}")
        if not (0.0 <= self.pretrain_fraction < 1.0):
            raise ScheduleError(
                f"pretrain_fraction: must be in [0, 1), got {self.pretrain_fraction}"
            )
        if self.n_prune_steps < 1:
            raise ScheduleError(f"n_prune_steps: must be >= 1, got {self.n_prune_steps}")

    def with_pretrain_fraction(self, value: float) -> "ScheduleSpec":
        return replace(self, pretrain_fraction=value)


@dataclass(frozen=True)
class SparsityTrace:
    """Sampled (progress, target sparsity) pairs, progress strictly increasing."""

    samples: tuple[tuple[float, float], ...] = field(default_factory=tuple)


def _check_t(t: float) -> None:
    if not (0.0 <= t <= 1.0):
        raise ScheduleError(f"t: progress must be in [0, 1], got {t}")


def eval_one_cycle(t: float, spec: ScheduleSpec) -> float:
    """Smooth sigmoid-shaped ramp from roughly s_i at t=0 to exactly s_f at t=1.

    s_t = s_i + (s_f - s_i) * (1 + exp(-alpha + beta)) / (1 + exp(-alpha*t + beta))

    Note s(0) sits slightly above s_i; the formula is kept verbatim rather
    than re-normalized.
    """
    _check_t(t)
    if spec.kind is not ScheduleKind.ONE_CYCLE:
        raise ScheduleError(f"kind: expected ONE_CYCLE, got {spec.kind}")
    num = 1.0 + math.exp(-spec.alpha + spec.beta)
    den = 1.0 + math.exp(-spec.alpha * t + spec.beta)
    return spec.s_i + (spec.s_f - spec.s_i) * num / den


def eval_one_shot(t: float, spec: ScheduleSpec) -> float:
    """Single step from s_i to s_f at the end of the pretraining phase."""
    _check_t(t)
    if spec.kind is not ScheduleKind.ONE_SHOT:
        raise ScheduleError(f"kind: expected ONE_SHOT, got {spec.kind}")
    return spec.s_f if t >= spec.pretrain_fraction else spec.s_i


def eval_iterative(t: float, spec: ScheduleSpec) -> float:
    """Staircase from s_i to s_f in n_prune_steps equal increments.

    [pretrain_fraction, 1] is split into n equal sub-intervals; at the start
    of sub-interval k the target jumps to s_i + k * (s_f - s_i) / n, so the
    first jump happens at pretrain_fraction and the last plateau is s_f.
    """
    _check_t(t)
    if spec.kind is not ScheduleKind.ITERATIVE:
        raise ScheduleError(f"kind: expected ITERATIVE, got {spec.kind}")
    pre = spec.pretrain_fraction
    if t < pre:
        return spec.s_i
    n = spec.n_prune_steps
    width = (1.0 - pre) / n
    k = min(int((t - pre) / width) + 1, n)
    return spec.s_i + k * (spec.s_f - spec.s_i) / n


def eval_agp(t: float, spec: ScheduleSpec) -> float:
    """Cubic ramp: s_f + (s_i - s_f) * (1 - u)^3 over the pruning window,
    where u is progress through [pretrain_fraction, 1]."""
    _check_t(t)
    if spec.kind is not ScheduleKind.AGP:
        raise ScheduleError(f"kind: expected AGP, got {spec.kind}")
    pre = spec.pretrain_fraction
    if t <= pre:  # inclusive so the window start is exactly s_i
        return spec.s_i
    u = (t - pre) / (1.0 - pre)
    return spec.s_f + (spec.s_i - spec.s_f) * (1.0 - u) ** 3


_EVALUATORS = {
    ScheduleKind.ONE_CYCLE: eval_one_cycle,
    ScheduleKind.ONE_SHOT: eval_one_shot,
    ScheduleKind.ITERATIVE: eval_iterative,
    ScheduleKind.AGP: eval_agp,
}


def sparsity_at(spec: ScheduleSpec, t: float) -> float:
    """Target sparsity at progress t, dispatched on kind and clamped to [0, 1]."""
    s = _EVALUATORS[spec.kind](t, spec)
    return min(max(s, 0.0), 1.0)


def trace(spec: ScheduleSpec, resolution: int) -> SparsityTrace:
    """Sample the schedule on a uniform grid of `resolution` points over [0, 1]."""
    if resolution < 2:
        raise ScheduleError(f"resolution: must be >= 2, got {resolution}")
    samples = tuple(
        (k / (resolution - 1), sparsity_at(spec, k / (resolution - 1)))
        for k in range(resolution)
    )
    return SparsityTrace(samples)
