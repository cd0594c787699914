"""MAC unit and full neuron: multiply-accumulate, bias, ReLU, saturation.

A neuron folds one product per input into the 21-bit accumulator, adds its
bias at accumulator scale (8-bit stored bias shifted left by the layer's
bias_shift), and squeezes the result back into 8 bits through ReLU plus a
right-shift-and-clamp stage.  Products can be exact or approximate depending
on the multiplier configuration; everything downstream of the multiplier is
always exact.
"""

from dataclasses import dataclass
from typing import Sequence

from .approx_mult import _check_mask, _product_rows
from .fixedpoint import ACC_MAX, SignMag8, SignedAcc, acc_add, rescale_clamp

BIAS_SHIFT_MAX = 13
ACT_SHIFT_MAX = 20


@dataclass(frozen=True)
class NeuronParams:
    """Quantized parameters of one neuron plus its layer's shift settings."""

    weights: tuple[SignMag8, ...]
    bias: SignMag8
    bias_shift: int
    act_shift: int

    def __post_init__(self):
        if not self.weights:
            raise ValueError("neuron needs at least one weight")
        if not 0 <= self.bias_shift <= BIAS_SHIFT_MAX:
            raise ValueError(f"bias_shift out of range [0, 13]: {self.bias_shift}")
        if not 0 <= self.act_shift <= ACT_SHIFT_MAX:
            raise ValueError(f"act_shift out of range [0, 20]: {self.act_shift}")


def mac_reduce(
    inputs: Sequence[SignMag8], weights: Sequence[SignMag8], mask: int = 0
) -> SignedAcc:
    """Fold input*weight products into the accumulator in index order.

    Each step behaves exactly like acc_add(acc, multiply_signed(x, w, mask)):
    a clamped running integer sum is step-for-step identical to the
    sign-magnitude fold, including saturation.
    """
    if len(inputs) != len(weights):
        raise ValueError(f"fan-in mismatch: {len(inputs)} inputs, {len(weights)} weights")
    if not inputs:
        raise ValueError("mac_reduce needs at least one input")
    _check_mask(mask)
    rows = _product_rows(mask)
    total = 0
    for x, w in zip(inputs, weights):
        p = rows[x.mag][w.mag]
        if x.sign ^ w.sign:
            p = -p
        total += p
        if total > ACC_MAX:
            total = ACC_MAX
        elif total < -ACC_MAX:
            total = -ACC_MAX
    return SignedAcc.from_int(total)


def apply_bias(acc: SignedAcc, bias: SignMag8, bias_shift: int) -> SignedAcc:
    """Add the bias at accumulator scale (left-shifted), saturating."""
    if not 0 <= bias_shift <= BIAS_SHIFT_MAX:
        raise ValueError(f"bias_shift out of range [0, 13]: {bias_shift}")
    return acc_add(acc, bias.value << bias_shift)


def activate(acc: SignedAcc, act_shift: int) -> SignMag8:
    """ReLU then saturate: negatives clip to zero, positives shift and clamp."""
    if acc.sign:
        return SignMag8(0, 0)
    return SignMag8(0, rescale_clamp(acc.mag, act_shift))


def neuron_forward(
    inputs: Sequence[SignMag8], params: NeuronParams, mask: int = 0
) -> SignMag8:
    """Complete neuron: MAC fold, bias, ReLU, saturation."""
    return activate(neuron_forward_raw(inputs, params, mask), params.act_shift)


def neuron_forward_raw(
    inputs: Sequence[SignMag8], params: NeuronParams, mask: int = 0
) -> SignedAcc:
    """Neuron output before activation: the signed value the comparator sees."""
    acc = mac_reduce(inputs, params.weights, mask)
    return apply_bias(acc, params.bias, params.bias_shift)
