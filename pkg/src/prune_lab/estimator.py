"""Scikit-learn estimator wrapper around the pruned-MLP trainer.

Lets the schedule-driven sparse training plug into pipelines,
cross-validation and grid search via the usual fit/predict/get_params
surface.
"""

from __future__ import annotations

import math

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.multiclass import unique_labels
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .nn import LrSchedule, SgdState, forward, init_network, loss_and_backward, lr_at, sgd_step, softmax
from .pruning import Mask, PruneState, actual_sparsity, apply_mask, update_mask
from .schedule import ScheduleKind, ScheduleSpec


class PrunedMLPClassifier(BaseEstimator, ClassifierMixin):
    """MLP classifier pruned during training by a sparsity schedule.

    Parameters mirror ScheduleSpec / LrSchedule; `schedule` is one of
    "one_cycle", "one_shot", "iterative", "agp".
    """

    def __init__(
        self,
        hidden_layer_sizes=(64, 64),
        schedule="one_cycle",
        initial_sparsity=0.0,
        final_sparsity=0.95,
        alpha=14.0,
        beta=5.0,
        pretrain_fraction=None,
        n_prune_steps=3,
        epochs=60,
        batch_size=64,
        lr_max=0.001,
        warmup_fraction=0.25,
        momentum=0.9,
        prune_every=0,
        random_state=0,
    ):
        self.hidden_layer_sizes = hidden_layer_sizes
        self.schedule = schedule
        self.initial_sparsity = initial_sparsity
        self.final_sparsity = final_sparsity
        self.alpha = alpha
        self.beta = beta
        self.pretrain_fraction = pretrain_fraction
        self.n_prune_steps = n_prune_steps
        self.epochs = epochs
        self.batch_size = batch_size
        self.lr_max = lr_max
        self.warmup_fraction = warmup_fraction
        self.momentum = momentum
        self.prune_every = prune_every
        self.random_state = random_state

    def _schedule_spec(self) -> ScheduleSpec:
        return ScheduleSpec(
            kind=ScheduleKind(self.schedule),
            s_i=self.initial_sparsity,
            s_f=self.final_sparsity,
            alpha=self.alpha,
            beta=self.beta,
            pretrain_fraction=self.pretrain_fraction,
            n_prune_steps=self.n_prune_steps,
        )

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        X = np.asarray(X, dtype=np.float64)
        self.classes_ = unique_labels(y)
        self.n_features_in_ = X.shape[1]
        class_index = {c: i for i, c in enumerate(self.classes_)}
        targets = np.array([class_index[v] for v in y], dtype=np.int64)

        dims = [X.shape[1], *self.hidden_layer_sizes, len(self.classes_)]
        net = init_network(dims, self.random_state)
        sgd = SgdState.for_network(net, self.momentum)
        state = PruneState(Mask.full_keep(net), self._schedule_spec())
        lr_sched = LrSchedule(lr_max=self.lr_max, warmup_fraction=self.warmup_fraction)

        n = len(targets)
        spe = math.ceil(n / self.batch_size)
        total_steps = self.epochs * spe
        prune_every = self.prune_every if self.prune_every > 0 else spe
        rng = np.random.Generator(np.random.PCG64(self.random_state))

        self.loss_curve_ = []
        step = 0
        for _ in range(self.epochs):
            perm = rng.permutation(n)
            losses = []
            for b in range(spe):
                t = step / total_steps
                if step % prune_every == 0:
                    _, event = update_mask(state, net, t, step)
                    if event is not None:
                        apply_mask(net, state.mask)
                idx = perm[b * self.batch_size : (b + 1) * self.batch_size]
                _, cache = forward(net, X[idx], state.mask)
                loss, grads = loss_and_backward(net, cache, targets[idx], state.mask)
                sgd_step(net, grads, sgd, lr_at(lr_sched, t), state.mask)
                losses.append(loss)
                step += 1
            self.loss_curve_.append(float(np.mean(losses)))
        _, event = update_mask(state, net, 1.0, step)
        if event is not None:
            apply_mask(net, state.mask)

        self.network_ = net
        self.mask_ = state.mask
        self.sparsity_ = actual_sparsity(state.mask)
        self.prune_events_ = state.events
        return self

    def decision_function(self, X):
        check_is_fitted(self, "network_")
        X = check_array(X)
        logits, _ = forward(self.network_, np.asarray(X, dtype=np.float64), self.mask_)
        return logits

    def predict_proba(self, X):
        return softmax(self.decision_function(X))

    def predict(self, X):
        return self.classes_[np.argmax(self.decision_function(X), axis=1)]
