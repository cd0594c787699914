"""Bit-exact simulator of an MLP accelerator with error-configurable MAC units.

A 62-30-10 fully connected network in 8-bit sign-magnitude arithmetic, whose
multipliers expose a 5-bit error-control mask (32 configurations, mask 0
exact).  The package covers the whole experiment: MNIST ingestion and feature
reduction, float training, post-training quantization, the multicycle
datapath with its 5-state controller, exhaustive multiplier error metrics,
a gate-count power proxy, and the 32-configuration sweep CLI.
"""

from .approx_mult import approx_columns, multiply_mag, multiply_signed, product_table
from .datapath import (
    CYCLES_PER_IMAGE,
    DatapathState,
    DatasetResult,
    FsmState,
    NetworkModel,
    Prediction,
    argmax,
    batch_forward,
    classify_image,
    fsm_next,
    run_dataset,
)
from .error_metrics import ErrorReport, MetricsSummary, evaluate_config, summarize_all
from .fixedpoint import (
    ACC_MAX,
    MAG_MAX,
    PRODUCT_MAX,
    Product15,
    SignedAcc,
    SignMag8,
    acc_add,
    decode,
    encode,
    rescale_clamp,
)
from .mac_neuron import (
    NeuronParams,
    activate,
    apply_bias,
    mac_reduce,
    neuron_forward,
    neuron_forward_raw,
)
from .power_model import CostReport, mac_cost, multiplier_cost, neuron_cost, savings_pct
from .trainer import (
    FloatMlp,
    TrainConfig,
    TrainResult,
    export_model,
    import_model,
    quantize_model,
    train_float,
)

__version__ = "0.1.0"
