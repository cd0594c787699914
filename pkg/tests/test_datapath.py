import numpy as np
import pytest

from amlpsim.datapath import (
    CYCLES_PER_IMAGE,
    DatapathState,
    FsmState,
    NetworkModel,
    argmax,
    batch_forward,
    classify_image,
    fsm_next,
    run_dataset,
    state_cycles,
)
from amlpsim.fixedpoint import SignedAcc, SignMag8
from amlpsim.mac_neuron import NeuronParams, neuron_forward, neuron_forward_raw

from conftest import random_features, random_model, sm


def reference_forward(model, features, mask):
    """Schedule-free oracle: all 30 hidden neurons, then all 10 outputs."""
    acts = [neuron_forward(features, p, mask) for p in model.hidden]
    raws = [neuron_forward_raw(acts, p, mask) for p in model.output]
    values = [r.value for r in raws]
    return values.index(max(values))


class TestFsm:
    def test_transition_chain(self):
        assert fsm_next(FsmState.S0, True) is FsmState.S1
        assert fsm_next(FsmState.S1, False) is FsmState.S2
        assert fsm_next(FsmState.S2, True) is FsmState.S3

    def test_loop_or_finish(self):
        assert fsm_next(FsmState.S3, True) is FsmState.S0
        assert fsm_next(FsmState.S3, False) is FsmState.S4

    def test_terminal_state_cannot_step(self):
        with pytest.raises(ValueError):
            fsm_next(FsmState.S4, True)

    def test_cycle_model_sums_to_220(self):
        per_state = [state_cycles(s) for s in (FsmState.S0, FsmState.S1, FsmState.S2, FsmState.S3)]
        assert per_state == [63, 63, 63, 31]
        assert sum(per_state) == CYCLES_PER_IMAGE


class TestArgmax:
    def test_unique_maximum(self):
        outs = [SignedAcc(0, 0)] * 10
        outs[7] = SignedAcc(0, 5)
        assert argmax(outs) == 7

    def test_all_equal_ties_to_zero(self):
        assert argmax([SignedAcc(0, 3)] * 10) == 0

    def test_all_negative_signed_comparison(self):
        outs = [SignedAcc(1, v) for v in (3, 1, 2, 9, 9, 9, 9, 9, 9, 9)]
        assert argmax(outs) == 1

    def test_length_checked(self):
        with pytest.raises(ValueError):
            argmax([SignedAcc(0, 1)] * 9)


class TestNetworkModelValidation:
    def test_random_model_is_well_formed(self):
        random_model(seed=3)

    def test_duplicate_indices_rejected(self):
        m = random_model()
        with pytest.raises(ValueError):
            NetworkModel((0,) * 62, m.hidden, m.output)

    def test_output_act_shift_must_be_zero(self):
        m = random_model()
        bad_out = tuple(
            NeuronParams(n.weights, n.bias, n.bias_shift, 1) for n in m.output
        )
        with pytest.raises(ValueError):
            NetworkModel(m.feature_indices, m.hidden, bad_out)

    def test_uniform_layer_shifts_required(self):
        m = random_model()
        mixed = (NeuronParams(m.hidden[0].weights, m.hidden[0].bias, 5, 8),) + m.hidden[1:]
        with pytest.raises(ValueError):
            NetworkModel(m.feature_indices, mixed, m.output)


class TestClassifyImage:
    def test_cycles_fixed_by_schedule(self):
        model = random_model(seed=1)
        feats = [sm(0)] * 62
        assert classify_image(model, feats, 0).cycles == CYCLES_PER_IMAGE

    def test_bias_only_propagation(self):
        zero_w62 = tuple(sm(0) for _ in range(62))
        zero_w30 = tuple(sm(0) for _ in range(30))
        hidden = tuple(
            NeuronParams(zero_w62, sm(0), 0, 0) for _ in range(30)
        )
        biases = [1, 2, 3, 9, 4, 5, 1, 2, 3, 4]  # unique max at neuron 3
        output = tuple(
            NeuronParams(zero_w30, sm(b), 0, 0) for b in biases
        )
        model = NetworkModel(tuple(range(62)), hidden, output)
        pred = classify_image(model, [sm(0)] * 62, 0)
        assert pred.label == 3

    def test_schedule_equivalent_to_reference(self):
        model = random_model(seed=2)
        rng = np.random.default_rng(2)
        feats = random_features(rng, 40)
        for mask in (0, 4, 13, 27, 31):
            for row in feats[:8]:
                sm_row = [SignMag8(0, int(v)) for v in row]
                assert classify_image(model, sm_row, mask).label == reference_forward(
                    model, sm_row, mask
                )

    def test_deterministic(self):
        model = random_model(seed=4)
        rng = np.random.default_rng(4)
        row = [SignMag8(0, int(v)) for v in random_features(rng, 1)[0]]
        labels = {classify_image(model, row, 9).label for _ in range(5)}
        assert len(labels) == 1

    def test_must_start_in_s0(self):
        model = random_model(seed=5)
        dp = DatapathState(state=FsmState.S2)
        with pytest.raises(ValueError):
            classify_image(model, [sm(0)] * 62, 0, dp=dp)


class TestBatchForward:
    def test_matches_scalar_path_including_registers(self):
        model = random_model(seed=6)
        rng = np.random.default_rng(6)
        feats = random_features(rng, 30)
        for mask in (0, 17, 31):
            hidden, raw, labels = batch_forward(model, feats, mask)
            for i in range(len(feats)):
                dp = DatapathState()
                sm_row = [SignMag8(0, int(v)) for v in feats[i]]
                pred = classify_image(model, sm_row, mask, dp=dp)
                assert pred.label == labels[i]
                assert (dp.hidden_regs.reshape(-1) == hidden[i]).all()
                assert (dp.output_raw == raw[i]).all()

    def test_tie_breaks_to_lowest_index_in_both_paths(self):
        zero_w62 = tuple(sm(0) for _ in range(62))
        zero_w30 = tuple(sm(0) for _ in range(30))
        hidden = tuple(NeuronParams(zero_w62, sm(0), 0, 0) for _ in range(30))
        biases = [0, 7, 7, 7, 0, 0, 0, 0, 0, 0]  # three-way tie, neurons 1/2/3
        output = tuple(NeuronParams(zero_w30, sm(b), 0, 0) for b in biases)
        model = NetworkModel(tuple(range(62)), hidden, output)
        feats = np.zeros((1, 62), dtype=np.uint8)
        _, _, labels = batch_forward(model, feats, 0)
        assert labels[0] == 1
        assert classify_image(model, [sm(0)] * 62, 0).label == 1


class TestRunDataset:
    def test_single_correct_image(self):
        model = random_model(seed=7)
        rng = np.random.default_rng(7)
        feats = random_features(rng, 1)
        label = classify_image(model, [SignMag8(0, int(v)) for v in feats[0]], 0).label
        result = run_dataset(model, feats, np.array([label]), 0)
        assert result.accuracy == 1.0
        assert result.total_cycles == CYCLES_PER_IMAGE

    def test_cycle_counter_additive(self):
        model = random_model(seed=8)
        rng = np.random.default_rng(8)
        feats = random_features(rng, 17)
        result = run_dataset(model, feats, np.zeros(17, dtype=np.int64), 3)
        assert result.total_cycles == 17 * CYCLES_PER_IMAGE

    def test_fast_and_scalar_paths_agree(self):
        model = random_model(seed=9)
        rng = np.random.default_rng(9)
        feats = random_features(rng, 25)
        labels = rng.integers(0, 10, size=25)
        for mask in (0, 22):
            fast = run_dataset(model, feats, labels, mask, fast=True, collect_trace=True)
            slow = run_dataset(model, feats, labels, mask, fast=False, collect_trace=True)
            assert fast.predictions == slow.predictions
            assert fast.accuracy == slow.accuracy
            assert fast.total_cycles == slow.total_cycles
            assert fast.trace == slow.trace

    def test_trace_shape(self):
        model = random_model(seed=10)
        rng = np.random.default_rng(10)
        n = 6
        feats = random_features(rng, n)
        result = run_dataset(model, feats, np.zeros(n, dtype=np.int64), 0, collect_trace=True)
        expected = (FsmState.S0, FsmState.S1, FsmState.S2, FsmState.S3) * n + (FsmState.S4,)
        assert result.trace == expected

    def test_empty_dataset_rejected(self):
        model = random_model(seed=11)
        with pytest.raises(ValueError):
            run_dataset(model, np.zeros((0, 62), dtype=np.uint8), np.zeros(0), 0)
