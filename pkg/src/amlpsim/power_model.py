"""Gate-count/activity proxy for per-configuration power.

Absolute power needs a synthesis flow, so this model only produces relative
costs in abstract units: a full-adder-equivalent column compressor costs 5
units per reduced bit plus 2 units of carry overhead, an OR compressor costs
1 unit per reduced bit, and partial-product generation costs one unit per AND
gate (49).  The fixed overheads stacked on top (accumulator/sign logic,
neuron overhead, network overhead) are calibrated so the relative savings
hierarchy of the modeled hardware is reproduced structurally: switching a
column pair to approximate mode always saves, and the saving fraction dilutes
monotonically from multiplier to MAC to neuron to network level.

Costs are operand-independent (static activity model) and always integers.
"""

from dataclasses import dataclass

from .approx_mult import CONFIG_COUNT, approx_columns

# partial products per column, c = 0..12
COLUMN_POPULATION = (1, 2, 3, 4, 5, 6, 7, 6, 5, 4, 3, 2, 1)

PP_GEN_COST = 49  # one unit per partial-product AND gate
FULL_ADDER_COST = 5  # per reduced bit in an exact column
EXACT_CARRY_OVERHEAD = 2  # per exact column
OR_COST = 1  # per reduced bit in an approximated column

ACCUMULATOR_OVERHEAD = 155  # 21-bit adder (105) + sign/compare logic (50)
NEURON_OVERHEAD = 324  # bias adder, ReLU, saturation, registers
MULTIPLIES_PER_IMAGE = 30 * 62 + 10 * 30  # 2160

# Network-level fixed cost, solved so the neuron-to-network saving dilution
# matches the modeled hardware's reported ratio at full approximation.
_NEURON_TO_NETWORK_RATIO = 24.78 / 13.33


def multiplier_cost(mask: int) -> int:
    """Static cost of the multiplier under one configuration."""
    approx = approx_columns(mask)
    cost = PP_GEN_COST
    for c, population in enumerate(COLUMN_POPULATION):
        if c in approx:
            cost += OR_COST * (population - 1)
        else:
            cost += FULL_ADDER_COST * (population - 1) + EXACT_CARRY_OVERHEAD
    return cost


def mac_cost(mask: int) -> int:
    return multiplier_cost(mask) + ACCUMULATOR_OVERHEAD


def neuron_cost(mask: int) -> int:
    return mac_cost(mask) + NEURON_OVERHEAD


def _network_overhead() -> int:
    base = MULTIPLIES_PER_IMAGE * neuron_cost(0)
    return round(base * (_NEURON_TO_NETWORK_RATIO - 1))


NETWORK_OVERHEAD = _network_overhead()


def network_cost_per_image(mask: int) -> int:
    return MULTIPLIES_PER_IMAGE * neuron_cost(mask) + NETWORK_OVERHEAD


@dataclass(frozen=True)
class CostReport:
    """Per-configuration costs and fractional savings versus exact mode."""

    config: int
    mult_cost: int
    mac_cost: int
    neuron_cost: int
    network_cost_per_image: int
    mult_saving: float
    mac_saving: float
    neuron_saving: float
    network_saving: float


def savings_pct(mask: int) -> CostReport:
    """Fractional saving versus the exact configuration at every level."""
    levels = (multiplier_cost, mac_cost, neuron_cost, network_cost_per_image)
    costs = [f(mask) for f in levels]
    baselines = [f(0) for f in levels]
    savings = [(c0 - c) / c0 for c, c0 in zip(costs, baselines)]
    return CostReport(mask, *costs, *savings)
