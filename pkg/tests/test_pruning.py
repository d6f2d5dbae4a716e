"""Magnitude pruning against a brute-force sort oracle."""

import numpy as np
import pytest

from prune_lab.nn import SgdState, forward, init_network, loss_and_backward, sgd_step
from prune_lab.pruning import (
    Mask,
    PruneError,
    PruneState,
    actual_sparsity,
    apply_mask,
    rank_global,
    target_prune_count,
    update_mask,
)
from prune_lab.schedule import ScheduleKind, ScheduleSpec


def single_layer_net(values):
    net = init_network([len(values), 1], seed=0)
    net.layers[0].weight = np.array([values], dtype=float).reshape(1, -1)
    return net


def brute_force_rank(net, mask):
    """Independent oracle: full sort of (|w|, layer, flat) over kept weights."""
    entries = []
    for li, (layer, lm) in enumerate(zip(net.layers, mask.layer_masks)):
        w = layer.weight.ravel()
        m = lm.ravel()
        for fi in range(w.size):
            if m[fi]:
                entries.append((abs(w[fi]), li, fi))
    entries.sort()
    return [(li, fi, mag) for mag, li, fi in entries]


class TestTargetPruneCount:
    @pytest.mark.parametrize("sparsity, total, expected", [
        (0.95, 100, 95),
        (0.9, 7, 6),
        (0.0, 123, 0),
        (1.0, 10, 10),
    ])
    def test_floor(self, sparsity, total, expected):
        assert target_prune_count(sparsity, total) == expected

    def test_domain(self):
        with pytest.raises(PruneError):
            target_prune_count(1.5, 10)


class TestRankGlobal:
    def test_sorted_by_magnitude(self):
        net = single_layer_net([0.5, -0.1, 0.3, -0.7])
        order = rank_global(net, Mask.full_keep(net))
        assert [fi for _, fi, _ in order] == [1, 2, 0, 3]
        assert [m for _, _, m in order] == pytest.approx([0.1, 0.3, 0.5, 0.7])

    def test_tie_breaks_by_layer_then_flat(self):
        net = init_network([2, 2, 1], seed=0)
        net.layers[0].weight[:] = [[0.5, 0.2], [0.2, 0.9]]
        net.layers[1].weight[:] = [[0.2, 0.8]]
        order = rank_global(net, Mask.full_keep(net))
        assert order[:3] == [(0, 1, 0.2), (0, 2, 0.2), (1, 0, 0.2)]

    def test_all_pruned_is_empty(self):
        net = single_layer_net([1.0, 2.0])
        mask = Mask([np.zeros_like(net.layers[0].weight, dtype=bool)])
        assert rank_global(net, mask) == []

    def test_matches_brute_force_randomized(self):
        rng = np.random.default_rng(0)
        for trial in range(50):
            net = init_network([3, 5, 4], seed=trial)
            mask = Mask([rng.random(l.weight.shape) > 0.3 for l in net.layers])
            assert rank_global(net, mask) == brute_force_rank(net, mask)

    def test_shape_mismatch(self):
        net = single_layer_net([1.0])
        with pytest.raises(PruneError):
            rank_global(net, Mask([np.ones((2, 2), dtype=bool)]))


class TestUpdateMask:
    def test_prunes_smallest(self):
        net = single_layer_net([0.5, -0.1, 0.3, -0.7])
        spec = ScheduleSpec(ScheduleKind.ONE_SHOT, s_i=0.0, s_f=0.5, pretrain_fraction=0.0)
        state = PruneState(Mask.full_keep(net), spec)
        mask, event = update_mask(state, net, 1.0)
        assert mask.layer_masks[0].ravel().tolist() == [True, False, False, True]
        assert event.pruned_this_event == 2
        assert event.achieved_sparsity == 0.5

    def test_no_event_when_target_below_current(self):
        net = single_layer_net([0.5, -0.1, 0.3, -0.7])
        spec = ScheduleSpec(ScheduleKind.AGP, s_i=0.0, s_f=0.9, pretrain_fraction=0.5)
        state = PruneState(Mask.full_keep(net), spec)
        update_mask(state, net, 1.0)
        before = [m.copy() for m in state.mask.layer_masks]
        _, event = update_mask(state, net, 0.0)  # target drops back to s_i
        assert event is None
        for b, a in zip(before, state.mask.layer_masks):
            assert np.array_equal(b, a)

    def test_cleared_sets_nested_over_progress(self):
        net = init_network([4, 8, 3], seed=3)
        spec = ScheduleSpec(ScheduleKind.ONE_CYCLE, s_i=0.0, s_f=0.95)
        state = PruneState(Mask.full_keep(net), spec)
        prev_cleared = set()
        for progress in np.linspace(0, 1, 17):
            update_mask(state, net, float(progress))
            cleared = {
                (li, fi)
                for li, lm in enumerate(state.mask.layer_masks)
                for fi in np.flatnonzero(~lm.ravel())
            }
            assert prev_cleared <= cleared
            prev_cleared = cleared

    def test_oracle_equivalence_randomized(self):
        # brute-force k-smallest oracle, including ties from duplicated values
        rng = np.random.default_rng(7)
        for trial in range(200):
            dims = [int(rng.integers(2, 6)) for _ in range(3)]
            net = init_network(dims, seed=trial)
            if trial % 3 == 0:  # force magnitude ties
                net.layers[0].weight[:] = np.round(net.layers[0].weight, 1)
            spec = ScheduleSpec(ScheduleKind.ONE_SHOT, s_i=0.0,
                                s_f=float(rng.uniform(0.1, 1.0)), pretrain_fraction=0.0)
            state = PruneState(Mask.full_keep(net), spec)
            total = state.mask.total_count
            k = target_prune_count(spec.s_f, total)
            expected = {
                (li, fi) for li, fi, _ in brute_force_rank(net, Mask.full_keep(net))[:k]
            }
            update_mask(state, net, 1.0)
            cleared = {
                (li, fi)
                for li, lm in enumerate(state.mask.layer_masks)
                for fi in np.flatnonzero(~lm.ravel())
            }
            assert cleared == expected

    def test_count_exactness(self):
        net = init_network([10, 100, 10], seed=1)
        spec = ScheduleSpec(ScheduleKind.ONE_SHOT, s_i=0.0, s_f=0.9, pretrain_fraction=0.0)
        state = PruneState(Mask.full_keep(net), spec)
        update_mask(state, net, 1.0)
        total = state.mask.total_count
        assert total - state.mask.kept_count == target_prune_count(0.9, total)


class TestApplyMaskAndSparsity:
    def test_full_keep_leaves_net_untouched(self):
        net = init_network([3, 4, 2], seed=0)
        before = [l.weight.copy() for l in net.layers]
        apply_mask(net, Mask.full_keep(net))
        for b, l in zip(before, net.layers):
            assert np.array_equal(b, l.weight)

    def test_all_prune_zeroes_weights_not_biases(self):
        net = init_network([3, 4, 2], seed=0)
        for l in net.layers:
            l.bias += 1.0
        mask = Mask([np.zeros_like(l.weight, dtype=bool) for l in net.layers])
        apply_mask(net, mask)
        for l in net.layers:
            assert np.all(l.weight == 0.0)
            assert np.all(l.bias == 1.0)

    def test_mixed_mask_zero_count(self):
        net = init_network([4, 6, 3], seed=2)
        rng = np.random.default_rng(5)
        mask = Mask([rng.random(l.weight.shape) > 0.4 for l in net.layers])
        apply_mask(net, mask)
        zeros = sum(int((l.weight == 0.0).sum()) for l in net.layers)
        assert zeros == mask.total_count - mask.kept_count

    def test_actual_sparsity(self):
        net = init_network([10, 10], seed=0)
        mask = Mask.full_keep(net)
        assert actual_sparsity(mask) == 0.0
        mask.layer_masks[0].ravel()[:95] = False
        assert actual_sparsity(mask) == 0.95

    def test_empty_mask_domain_error(self):
        with pytest.raises(PruneError):
            actual_sparsity(Mask([]))


class TestZeroPersistence:
    def test_masked_weights_stay_zero_through_training(self):
        rng = np.random.default_rng(9)
        net = init_network([3, 8, 2], seed=4)
        spec = ScheduleSpec(ScheduleKind.ONE_SHOT, s_i=0.0, s_f=0.5, pretrain_fraction=0.0)
        state = PruneState(Mask.full_keep(net), spec)
        update_mask(state, net, 1.0)
        apply_mask(net, state.mask)
        sgd = SgdState.for_network(net)
        x = rng.standard_normal((12, 3))
        y = rng.integers(0, 2, 12)
        for _ in range(20):
            _, cache = forward(net, x, state.mask)
            _, grads = loss_and_backward(net, cache, y, state.mask)
            sgd_step(net, grads, sgd, 0.05, state.mask)
        for layer, lm in zip(net.layers, state.mask.layer_masks):
            assert np.all(layer.weight[~lm] == 0.0)
