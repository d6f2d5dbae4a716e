"""Global unstructured magnitude pruning.

Weights are ranked by absolute value across all layers; the mask is a
per-layer boolean keep/prune array, monotone over a run (a pruned weight
never comes back). Biases are never pruned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import Network
from .schedule import ScheduleSpec, sparsity_at


class PruneError(ValueError):
    """Shape or domain violation in the pruning machinery."""


@dataclass
class Mask:
    layer_masks: list[np.ndarray]  # bool, shaped like each weight matrix

    @classmethod
    def full_keep(cls, net: Network) -> "Mask":
        return cls([np.ones_like(l.weight, dtype=bool) for l in net.layers])

    @property
    def kept_count(self) -> int:
        return int(sum(m.sum() for m in self.layer_masks))

    @property
    def total_count(self) -> int:
        return int(sum(m.size for m in self.layer_masks))

    def copy(self) -> "Mask":
        return Mask([m.copy() for m in self.layer_masks])

    def matches(self, net: Network) -> bool:
        return len(self.layer_masks) == len(net.layers) and all(
            m.shape == l.weight.shape for m, l in zip(self.layer_masks, net.layers)
        )


@dataclass(frozen=True)
class PruneEvent:
    step: int
    progress: float
    target_sparsity: float
    achieved_sparsity: float
    pruned_this_event: int


@dataclass
class PruneState:
    mask: Mask
    spec: ScheduleSpec
    prune_every: int = 1
    events: list[PruneEvent] = field(default_factory=list)


def target_prune_count(sparsity: float, total: int) -> int:
    """Discretize a continuous sparsity target: floor(sparsity * total)."""
    if not (0.0 <= sparsity <= 1.0):
        raise PruneError(f"sparsity: must be in [0, 1], got {sparsity}")
    if total < 0:
        raise PruneError(f"total: must be >= 0, got {total}")
    return int(np.floor(sparsity * total))


def rank_global(net: Network, mask: Mask) -> list[tuple[int, int, float]]:
    """All currently-kept weights sorted ascending by |w|.

    Ties break by (layer index, flat index) ascending, so the order is fully
    deterministic.
    """
    if not mask.matches(net):
        raise PruneError("mask shape does not match network")
    layer_idx, flat_idx, magnitudes = _kept_arrays(net, mask)
    order = np.lexsort((flat_idx, layer_idx, magnitudes))
    return [
        (int(layer_idx[i]), int(flat_idx[i]), float(magnitudes[i])) for i in order
    ]


def _kept_arrays(net: Network, mask: Mask):
    layer_parts, flat_parts, mag_parts = [], [], []
    for li, (layer, lm) in enumerate(zip(net.layers, mask.layer_masks)):
        kept = np.flatnonzero(lm.ravel())
        layer_parts.append(np.full(kept.size, li, dtype=np.int64))
        flat_parts.append(kept)
        mag_parts.append(np.abs(layer.weight.ravel()[kept]))
    return (
        np.concatenate(layer_parts),
        np.concatenate(flat_parts),
        np.concatenate(mag_parts),
    )


def update_mask(
    state: PruneState, net: Network, progress: float, step: int = 0
) -> tuple[Mask, PruneEvent | None]:
    """Prune down to the schedule's target at `progress`, in place.

    Clears exactly enough of the smallest-magnitude kept weights to reach
    floor(target * total); never re-enables a cleared bit. Returns the event
    when any bit changed.
    """
    if not (0.0 <= progress <= 1.0):
        raise PruneError(f"progress: must be in [0, 1], got {progress}")
    mask = state.mask
    if not mask.matches(net):
        raise PruneError("mask shape does not match network")
    total = mask.total_count
    target_sparsity = sparsity_at(state.spec, progress)
    target = target_prune_count(target_sparsity, total)
    pruned_now = total - mask.kept_count
    to_clear = target - pruned_now
    if to_clear <= 0:
        return mask, None

    layer_idx, flat_idx, magnitudes = _kept_arrays(net, mask)
    order = np.lexsort((flat_idx, layer_idx, magnitudes))[:to_clear]
    for li, fi in zip(layer_idx[order], flat_idx[order]):
        state.mask.layer_masks[li].ravel()[fi] = False

    event = PruneEvent(
        step=step,
        progress=progress,
        target_sparsity=target_sparsity,
        achieved_sparsity=actual_sparsity(mask),
        pruned_this_event=int(to_clear),
    )
    state.events.append(event)
    return mask, event


def apply_mask(net: Network, mask: Mask) -> None:
    """Hard-zero every masked weight in place; biases and kept weights untouched."""
    if not mask.matches(net):
        raise PruneError("mask shape does not match network")
    for layer, lm in zip(net.layers, mask.layer_masks):
        layer.weight *= lm


def actual_sparsity(mask: Mask) -> float:
    """Fraction of prunable weights currently pruned."""
    total = mask.total_count
    if total == 0:
        raise PruneError("mask has no prunable weights")
    return 1.0 - mask.kept_count / total
