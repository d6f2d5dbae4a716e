"""Minimal dense feed-forward network with manual backprop.

Everything is float64 numpy. A network is reconstructible bit-exactly from
(layer_dims, seed); training with SGD + momentum is deterministic given the
same inputs. Pruning masks (per-layer boolean arrays shaped like each weight
matrix) can be threaded through forward/backward/update so that masked
weights contribute nothing and stay exactly zero.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np


class NnError(ValueError):
    """Shape or domain violation in the network core."""


class NumericError(RuntimeError):
    """Non-finite value where a finite one is required; the run must abort."""


class Activation(Enum):
    RELU = "relu"
    IDENTITY = "identity"


@dataclass
class DenseLayer:
    weight: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: Activation


@dataclass
class Network:
    layers: list[DenseLayer]
    init_seed: int

    @property
    def layer_dims(self) -> list[int]:
        dims = [self.layers[0].weight.shape[1]]
        dims += [layer.weight.shape[0] for layer in self.layers]
        return dims

    def weight_shapes(self) -> list[tuple[int, int]]:
        return [layer.weight.shape for layer in self.layers]


def init_network(layer_dims: list[int], seed: int) -> Network:
    """Build a network with uniform(+-1/sqrt(fan_in)) weights and zero biases.

    The last layer is Identity (logits), all hidden layers ReLU. Identical
    (layer_dims, seed) gives bit-identical parameters.
    """
    if len(layer_dims) < 2:
        raise NnError(f"layer_dims: need at least 2 dims, got {layer_dims}")
    if any(d <= 0 for d in layer_dims):
        raise NnError(f"layer_dims: all dims must be positive, got {layer_dims}")
    rng = np.random.Generator(np.random.PCG64(seed))
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(layer_dims[:-1], layer_dims[1:])):
        bound = 1.0 / math.sqrt(fan_in)
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        bias = np.zeros(fan_out)
        act = Activation.IDENTITY if i == len(layer_dims) - 2 else Activation.RELU
        layers.append(DenseLayer(weight, bias, act))
    return Network(layers, init_seed=seed)


def clone_network(net: Network) -> Network:
    return Network(
        [DenseLayer(l.weight.copy(), l.bias.copy(), l.activation) for l in net.layers],
        net.init_seed,
    )


@dataclass
class ForwardCache:
    batch: np.ndarray
    inputs: list[np.ndarray]  # input to each layer
    pre_acts: list[np.ndarray]  # z = x @ W.T + b


def _effective_weight(layer: DenseLayer, layer_mask: np.ndarray | None) -> np.ndarray:
    if layer_mask is None:
        return layer.weight
    if layer_mask.shape != layer.weight.shape:
        raise NnError(
            f"mask shape {layer_mask.shape} does not match weight {layer.weight.shape}"
        )
    return layer.weight * layer_mask


def forward(net: Network, batch: np.ndarray, mask=None) -> tuple[np.ndarray, ForwardCache]:
    """Run a (batch, in_dim) matrix through the network; returns logits + cache."""
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.layers[0].weight.shape[1]:
        raise NnError(
            f"batch shape {batch.shape} incompatible with input dim "
            f"{net.layers[0].weight.shape[1]}"
        )
    layer_masks = mask.layer_masks if mask is not None else [None] * len(net.layers)
    if len(layer_masks) != len(net.layers):
        raise NnError("mask layer count does not match network")
    x = batch
    inputs, pre_acts = [], []
    for layer, lm in zip(net.layers, layer_masks):
        inputs.append(x)
        z = x @ _effective_weight(layer, lm).T + layer.bias
        pre_acts.append(z)
        x = np.maximum(z, 0.0) if layer.activation is Activation.RELU else z
    return x, ForwardCache(batch, inputs, pre_acts)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


@dataclass
class Gradients:
    weights: list[np.ndarray]
    biases: list[np.ndarray]


def loss_and_backward(
    net: Network, cache: ForwardCache, labels: np.ndarray, mask=None
) -> tuple[float, Gradients]:
    """Mean softmax cross-entropy and its exact analytic gradients.

    Masked weight gradients come out exactly zero.
    """
    labels = np.asarray(labels)
    n_layers = len(net.layers)
    if len(cache.inputs) != n_layers:
        raise NnError("cache does not match network (layer count)")
    logits = cache.pre_acts[-1]
    if net.layers[-1].activation is not Activation.IDENTITY:
        raise NnError("last layer must be Identity (logits)")
    n, n_classes = logits.shape
    if labels.shape != (n,) or labels.min() < 0 or labels.max() >= n_classes:
        raise NnError(f"labels out of range for {n_classes} classes")

    probs = softmax(logits)
    loss = float(-np.mean(np.log(probs[np.arange(n), labels] + 1e-300)))

    layer_masks = mask.layer_masks if mask is not None else [None] * n_layers
    delta = probs.copy()
    delta[np.arange(n), labels] -= 1.0
    delta /= n  # d(loss)/d(logits)

    w_grads: list[np.ndarray] = [None] * n_layers
    b_grads: list[np.ndarray] = [None] * n_layers
    for i in range(n_layers - 1, -1, -1):
        layer = net.layers[i]
        x = cache.inputs[i]
        grad_w = delta.T @ x
        if layer_masks[i] is not None:
            grad_w *= layer_masks[i]
        w_grads[i] = grad_w
        b_grads[i] = delta.sum(axis=0)
        if i > 0:
            delta = delta @ _effective_weight(layer, layer_masks[i])
            if net.layers[i - 1].activation is Activation.RELU:
                delta = delta * (cache.pre_acts[i - 1] > 0)
    return loss, Gradients(w_grads, b_grads)


@dataclass
class SgdState:
    momentum: float = 0.9
    w_velocity: list[np.ndarray] = field(default_factory=list)
    b_velocity: list[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_network(cls, net: Network, momentum: float = 0.9) -> "SgdState":
        if not (0.0 <= momentum < 1.0):
            raise NnError(f"momentum: must be in [0, 1), got {momentum}")
        return cls(
            momentum,
            [np.zeros_like(l.weight) for l in net.layers],
            [np.zeros_like(l.bias) for l in net.layers],
        )


def sgd_step(net: Network, grads: Gradients, state: SgdState, lr: float, mask=None) -> None:
    """In-place momentum SGD update; masked weights (and their velocity) are
    re-zeroed after the step so pruned weights stay exactly 0."""
    if not math.isfinite(lr) or lr <= 0:
        raise NumericError(f"lr: must be positive and finite, got {lr}")
    layer_masks = mask.layer_masks if mask is not None else [None] * len(net.layers)
    for layer, gw, gb, vw, vb, lm in zip(
        net.layers, grads.weights, grads.biases, state.w_velocity, state.b_velocity, layer_masks
    ):
        if not (np.isfinite(gw).all() and np.isfinite(gb).all()):
            raise NumericError("non-finite gradient; aborting run")
        vw *= state.momentum
        vw -= lr * gw
        vb *= state.momentum
        vb -= lr * gb
        layer.weight += vw
        layer.bias += vb
        if lm is not None:
            layer.weight *= lm
            vw *= lm


@dataclass(frozen=True)
class LrSchedule:
    """1cycle-style learning rate: cosine warmup to lr_max over the first
    warmup_fraction of training, then cosine decay to lr_max/div_final."""

    lr_max: float = 0.001
    warmup_fraction: float = 0.25
    div_start: float = 25.0
    div_final: float = 1e4

    def __post_init__(self):
        if self.lr_max <= 0:
            raise NnError(f"lr_max: must be > 0, got {self.lr_max}")
        if not (0.0 < self.warmup_fraction < 1.0):
            raise NnError(f"warmup_fraction: must be in (0, 1), got {self.warmup_fraction}")
        if self.div_start <= 0 or self.div_final <= 0:
            raise NnError("div_start and div_final must be > 0")


def lr_at(sched: LrSchedule, t: float) -> float:
    """Learning rate at progress t in [0, 1]; continuous, peaks at warmup_fraction."""
    if not (0.0 <= t <= 1.0):
        raise NnError(f"t: progress must be in [0, 1], got {t}")
    if t <= sched.warmup_fraction:
        start = sched.lr_max / sched.div_start
        u = t / sched.warmup_fraction
        return start + (sched.lr_max - start) * (1.0 - math.cos(math.pi * u)) / 2.0
    end = sched.lr_max / sched.div_final
    u = (t - sched.warmup_fraction) / (1.0 - sched.warmup_fraction)
    return end + (sched.lr_max - end) * (1.0 + math.cos(math.pi * u)) / 2.0


def save_checkpoint(net: Network, path: str | Path) -> None:
    """JSON checkpoint: dims, seed, and flat parameter lists.

    Python's float repr is shortest-round-trip, so doubles survive the JSON
    round trip bit-exactly.
    """
    payload = {
        "layer_dims": net.layer_dims,
        "init_seed": net.init_seed,
        "activations": [l.activation.value for l in net.layers],
        "weights": [l.weight.ravel().tolist() for l in net.layers],
        "biases": [l.bias.tolist() for l in net.layers],
    }
    Path(path).write_text(json.dumps(payload))


def load_checkpoint(path: str | Path) -> Network:
    payload = json.loads(Path(path).read_text())
    dims = payload["layer_dims"]
    layers = []
    for i, act in enumerate(payload["activations"]):
        shape = (dims[i + 1], dims[i])
        weight = np.array(payload["weights"][i], dtype=np.float64).reshape(shape)
        bias = np.array(payload["biases"][i], dtype=np.float64)
        layers.append(DenseLayer(weight, bias, Activation(act)))
    return Network(layers, init_seed=payload["init_seed"])
