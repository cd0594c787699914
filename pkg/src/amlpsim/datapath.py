"""Multicycle datapath and 5-state controller.

Ten physical neurons are time-shared over four computation passes per image:
states S0/S1/S2 run hidden neurons 0-9 / 10-19 / 20-29 and park their
activations in one register bank each; S3 feeds the 30 banked activations to
the ten output neurons, compares their pre-activation values, and bumps the
image counter.  S3 loops back to S0 while images remain, otherwise the
controller parks in the terminal state S4.

Cycle model: one input consumed per cycle plus one writeback/transition cycle
per state, so 63 + 63 + 63 + 31 = 220 cycles per image (see state_cycles).
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .approx_mult import _check_mask, product_table
from .fixedpoint import ACC_MAX, MAG_MAX, SignMag8, SignedAcc
from .mac_neuron import NeuronParams, neuron_forward, neuron_forward_raw

N_INPUTS = 62
N_HIDDEN = 30
N_OUTPUTS = 10
N_PHYSICAL = 10
POOLED_SIZE = 196

CYCLES_PER_IMAGE = 220


class FsmState(Enum):
    S0 = 0
    S1 = 1
    S2 = 2
    S3 = 3
    S4 = 4


def fsm_next(state: FsmState, images_remaining: bool) -> FsmState:
    """Controller transition; S4 is terminal and cannot be stepped."""
    if state is FsmState.S4:
        raise ValueError("cannot step the controller out of the terminal state")
    if state is FsmState.S3:
        return FsmState.S0 if images_remaining else FsmState.S4
    return FsmState(state.value + 1)


def state_cycles(state: FsmState) -> int:
    """Cycles spent in one state: fan-in reads plus one writeback/transition."""
    if state in (FsmState.S0, FsmState.S1, FsmState.S2):
        return N_INPUTS + 1
    if state is FsmState.S3:
        return N_HIDDEN + 1
    return 0


@dataclass(frozen=True)
class NetworkModel:
    """Quantized 62-30-10 network plus the input feature selection."""

    feature_indices: tuple[int, ...]
    hidden: tuple[NeuronParams, ...]
    output: tuple[NeuronParams, ...]
    version: int = 1

    def __post_init__(self):
        if len(self.feature_indices) != N_INPUTS:
            raise ValueError(f"expected {N_INPUTS} feature indices")
        if len(set(self.feature_indices)) != N_INPUTS:
            raise ValueError("feature indices must be distinct")
        if any(not 0 <= i < POOLED_SIZE for i in self.feature_indices):
            raise ValueError(f"feature indices must be < {POOLED_SIZE}")
        if len(self.hidden) != N_HIDDEN:
            raise ValueError(f"expected {N_HIDDEN} hidden neurons")
        if len(self.output) != N_OUTPUTS:
            raise ValueError(f"expected {N_OUTPUTS} output neurons")
        for n in self.hidden:
            if len(n.weights) != N_INPUTS:
                raise ValueError("hidden neuron fan-in must be 62")
        for n in self.output:
            if len(n.weights) != N_HIDDEN:
                raise ValueError("output neuron fan-in must be 30")
        for name, layer in (("hidden", self.hidden), ("output", self.output)):
            shifts = {(n.bias_shift, n.act_shift) for n in layer}
            if len(shifts) != 1:
                raise ValueError(f"{name} layer shifts must be uniform")
        if self.output[0].act_shift != 0:
            raise ValueError("output layer act_shift must be 0 (raw comparison)")

    @property
    def hidden_act_shift(self) -> int:
        return self.hidden[0].act_shift

    @property
    def hidden_bias_shift(self) -> int:
        return self.hidden[0].bias_shift

    @property
    def output_bias_shift(self) -> int:
        return self.output[0].bias_shift


@dataclass(frozen=True)
class Prediction:
    label: int
    cycles: int


@dataclass
class DatapathState:
    """Mutable register file of one datapath instance (single owner).

    hidden_regs holds activation magnitudes (activations are never negative);
    output_raw holds the decoded signed comparator inputs.  When trace is a
    list, every executed state is appended to it.
    """

    state: FsmState = FsmState.S0
    hidden_regs: np.ndarray = field(
        default_factory=lambda: np.zeros((3, N_PHYSICAL), dtype=np.uint8)
    )
    output_raw: np.ndarray = field(
        default_factory=lambda: np.zeros(N_OUTPUTS, dtype=np.int64)
    )
    image_counter: int = 0
    cycle_counter: int = 0
    trace: list[FsmState] | None = None

    def advance(self, images_remaining: bool) -> None:
        """Account for the current state's cycles and take the transition."""
        if self.trace is not None:
            self.trace.append(self.state)
        self.cycle_counter += state_cycles(self.state)
        self.state = fsm_next(self.state, images_remaining)


@dataclass(frozen=True)
class DatasetResult:
    accuracy: float
    total_cycles: int
    predictions: tuple[int, ...]
    trace: tuple[FsmState, ...] | None = None


def argmax(outputs: Sequence[SignedAcc]) -> int:
    """Index of the maximum signed value; ties go to the lowest index."""
    if len(outputs) != N_OUTPUTS:
        raise ValueError(f"expected {N_OUTPUTS} output values, got {len(outputs)}")
    best = 0
    best_value = outputs[0].value
    for k in range(1, N_OUTPUTS):
        v = outputs[k].value
        if v > best_value:
            best, best_value = k, v
    return best


def classify_image(
    model: NetworkModel,
    features: Sequence[SignMag8],
    mask: int = 0,
    dp: DatapathState | None = None,
    images_remaining: bool = False,
) -> Prediction:
    """Run one image through the FSM-scheduled datapath.

    With no explicit DatapathState a fresh one is created and left in S4
    (single-image run).  When run_dataset supplies its state, the controller
    loops back to S0 between images instead.
    """
    if len(features) != N_INPUTS:
        raise ValueError(f"expected {N_INPUTS} features, got {len(features)}")
    _check_mask(mask)
    if dp is None:
        dp = DatapathState()
    if dp.state is not FsmState.S0:
        raise ValueError(f"datapath must start an image in S0, is in {dp.state}")

    # S0/S1/S2: three hidden passes of the ten physical neurons
    for bank in range(3):
        group = model.hidden[bank * N_PHYSICAL : (bank + 1) * N_PHYSICAL]
        for k, params in enumerate(group):
            dp.hidden_regs[bank, k] = neuron_forward(features, params, mask).mag
        dp.advance(images_remaining)

    # S3: output pass over the 30 banked activations, then the comparator
    acts = [SignMag8(0, int(m)) for m in dp.hidden_regs.reshape(-1)]
    raws = [neuron_forward_raw(acts, params, mask) for params in model.output]
    dp.output_raw[:] = [r.value for r in raws]
    label = argmax(raws)
    dp.image_counter += 1
    dp.advance(images_remaining)
    return Prediction(label=label, cycles=CYCLES_PER_IMAGE)


def _layer_arrays(layer: Sequence[NeuronParams]):
    """Weight magnitude/sign matrices and bias terms for the batched path."""
    mags = np.array([[w.mag for w in n.weights] for n in layer], dtype=np.uint8)
    signs = np.array(
        [[-1 if w.sign else 1 for w in n.weights] for n in layer], dtype=np.int64
    )
    bias_terms = np.array([n.bias.value << n.bias_shift for n in layer], dtype=np.int64)
    return mags, signs, bias_terms


def batch_forward(model: NetworkModel, features: np.ndarray, mask: int = 0):
    """Evaluate many images at once; bit-identical to the scalar neuron path.

    features: (N, 62) uint8 magnitudes (input signs are always 0).
    Returns (hidden_acts (N,30) uint8, output_raw (N,10) int64, labels (N,)).

    Partial sums of at most 62 products of magnitude <= 16129 stay below the
    accumulator limit, so the only clamp that can fire is the one after the
    bias add; a single post-add clamp therefore matches the saturating fold.
    """
    _check_mask(mask)
    features = np.asarray(features)
    if features.ndim != 2 or features.shape[1] != N_INPUTS:
        raise ValueError(f"features must be (N, {N_INPUTS})")
    table = product_table(mask).astype(np.int64)

    h_mags, h_signs, h_bias = _layer_arrays(model.hidden)
    act_shift = model.hidden_act_shift
    n = features.shape[0]
    hidden_acts = np.empty((n, N_HIDDEN), dtype=np.uint8)
    for j in range(N_HIDDEN):
        dots = (table[features, h_mags[j]] * h_signs[j]).sum(axis=1)
        pre = np.clip(dots + h_bias[j], -ACC_MAX, ACC_MAX)
        hidden_acts[:, j] = np.where(
            pre > 0, np.minimum(pre >> act_shift, MAG_MAX), 0
        ).astype(np.uint8)

    o_mags, o_signs, o_bias = _layer_arrays(model.output)
    output_raw = np.empty((n, N_OUTPUTS), dtype=np.int64)
    for k in range(N_OUTPUTS):
        dots = (table[hidden_acts, o_mags[k]] * o_signs[k]).sum(axis=1)
        output_raw[:, k] = np.clip(dots + o_bias[k], -ACC_MAX, ACC_MAX)

    labels = np.argmax(output_raw, axis=1)  # first maximum wins ties
    return hidden_acts, output_raw, labels


def run_dataset(
    model: NetworkModel,
    features: np.ndarray,
    labels: np.ndarray,
    mask: int = 0,
    *,
    fast: bool = True,
    collect_trace: bool = False,
) -> DatasetResult:
    """Classify a whole dataset, driving the controller across images.

    The fast path computes all neuron values in one batched pass (verified
    bit-identical to the scalar path) while the FSM still steps through its
    full per-image schedule for register, counter, and trace bookkeeping.
    """
    features = np.asarray(features)
    labels = np.asarray(labels)
    n = features.shape[0]
    if n == 0:
        raise ValueError("dataset is empty")
    if labels.shape[0] != n:
        raise ValueError("features/labels length mismatch")

    dp = DatapathState(trace=[] if collect_trace else None)
    predictions = np.empty(n, dtype=np.int64)

    if fast:
        hidden_acts, output_raw, batch_labels = batch_forward(model, features, mask)
        for i in range(n):
            remaining = i + 1 < n
            for bank in range(3):
                dp.hidden_regs[bank, :] = hidden_acts[
                    i, bank * N_PHYSICAL : (bank + 1) * N_PHYSICAL
                ]
                dp.advance(remaining)
            dp.output_raw[:] = output_raw[i]
            dp.image_counter += 1
            dp.advance(remaining)
            predictions[i] = batch_labels[i]
    else:
        for i in range(n):
            sm_row = [SignMag8(0, int(m)) for m in features[i]]
            predictions[i] = classify_image(
                model, sm_row, mask, dp=dp, images_remaining=i + 1 < n
            ).label

    if dp.trace is not None:
        dp.trace.append(dp.state)
    if dp.state is not FsmState.S4:
        raise ValueError("controller did not reach the terminal state")
    accuracy = float(np.mean(predictions == labels))
    return DatasetResult(
        accuracy=accuracy,
        total_cycles=dp.cycle_counter,
        predictions=tuple(int(p) for p in predictions),
        trace=tuple(dp.trace) if dp.trace is not None else None,
    )
