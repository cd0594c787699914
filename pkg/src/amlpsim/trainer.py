"""Float training of the 62-30-10 MLP and post-training quantization/export.

Training is plain mini-batch gradient descent with momentum on softmax
cross-entropy, single-threaded and fully deterministic for a given seed
(fixed init, fixed shuffle order).  Quantization is symmetric per layer:
weights scale to +/-127, biases are refit as an 8-bit value times a layer-wide
power-of-two shift at accumulator scale, and the hidden layer's saturation
shift is chosen from calibration pre-activations so that at most 1% of them
clip.

The model file is a little-endian binary blob with a CRC32 trailer; see
export_model for the exact layout.
"""

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datapath import N_HIDDEN, N_INPUTS, N_OUTPUTS, NetworkModel
from .errors import (
    DegenerateScaleError,
    ModelChecksumError,
    ModelFormatError,
    ModelMagicError,
    ModelTruncatedError,
    ModelVersionError,
    TrainingError,
)
from .fixedpoint import ACC_MAX, MAG_MAX, SignMag8
from .mac_neuron import BIAS_SHIFT_MAX, NeuronParams

MODEL_MAGIC = b"AMLP"
MODEL_VERSION = 1
INPUT_SCALE = 1.0 / 127.0  # float value of one input magnitude step
CLIP_FRACTION = 0.01  # calibration: fraction of pre-activations allowed to clip


@dataclass
class FloatMlp:
    """Float parameters: w1 (30,62), b1 (30,), w2 (10,30), b2 (10,)."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray

    def __post_init__(self):
        if self.w1.shape != (N_HIDDEN, N_INPUTS) or self.b1.shape != (N_HIDDEN,):
            raise ValueError("hidden layer shape mismatch")
        if self.w2.shape != (N_OUTPUTS, N_HIDDEN) or self.b2.shape != (N_OUTPUTS,):
            raise ValueError("output layer shape mismatch")
        for arr in (self.w1, self.b1, self.w2, self.b2):
            if not np.all(np.isfinite(arr)):
                raise ValueError("model parameters must be finite")

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Logits for (N, 62) inputs scaled to [0, 1]."""
        h = np.maximum(x @ self.w1.T + self.b1, 0.0)
        return h @ self.w2.T + self.b2

    def predict(self, x: np.ndarray) -> np.ndarray:
        return np.argmax(self.forward(x), axis=1)


@dataclass(frozen=True)
class TrainConfig:
    seed: int = 42
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 0.05
    momentum: float = 0.9

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch size must be positive")
        if self.learning_rate <= 0 or not 0 <= self.momentum < 1:
            raise ValueError("learning rate must be positive, momentum in [0, 1)")


@dataclass(frozen=True)
class TrainResult:
    model: FloatMlp
    train_accuracy: float
    epoch_losses: tuple[float, ...]


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grads(model: FloatMlp, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy over a batch and its analytic gradients."""
    h_pre = x @ model.w1.T + model.b1
    h = np.maximum(h_pre, 0.0)
    logits = h @ model.w2.T + model.b2
    probs = _softmax(logits)
    n = x.shape[0]
    with np.errstate(divide="ignore"):
        # a true-class probability underflowing to zero is divergence
        loss = float(-np.mean(np.log(probs[np.arange(n), y])))

    dlogits = probs.copy()
    dlogits[np.arange(n), y] -= 1.0
    dlogits /= n
    gw2 = dlogits.T @ h
    gb2 = dlogits.sum(axis=0)
    dh = dlogits @ model.w2
    dh_pre = dh * (h_pre > 0)
    gw1 = dh_pre.T @ x
    gb1 = dh_pre.sum(axis=0)
    return loss, (gw1, gb1, gw2, gb2)


def train_float(features01: np.ndarray, labels: np.ndarray, tc: TrainConfig) -> TrainResult:
    """Train the float MLP; inputs are feature magnitudes scaled by 1/127."""
    x = np.asarray(features01, dtype=np.float64)
    y = np.asarray(labels, dtype=np.int64)
    if x.ndim != 2 or x.shape[1] != N_INPUTS or x.shape[0] == 0:
        raise ValueError(f"features must be non-empty (N, {N_INPUTS})")
    if y.shape != (x.shape[0],):
        raise ValueError("labels must match features")

    rng = np.random.default_rng(tc.seed)
    lim1 = 2.0 / np.sqrt(N_INPUTS)
    lim2 = 2.0 / np.sqrt(N_HIDDEN)
    model = FloatMlp(
        w1=rng.uniform(-lim1, lim1, size=(N_HIDDEN, N_INPUTS)),
        b1=np.zeros(N_HIDDEN),
        w2=rng.uniform(-lim2, lim2, size=(N_OUTPUTS, N_HIDDEN)),
        b2=np.zeros(N_OUTPUTS),
    )
    velocity = [np.zeros_like(p) for p in (model.w1, model.b1, model.w2, model.b2)]

    n = x.shape[0]
    epoch_losses = []
    for _ in range(tc.epochs):
        order = rng.permutation(n)
        total_loss = 0.0
        for start in range(0, n, tc.batch_size):
            idx = order[start : start + tc.batch_size]
            loss, grads = loss_and_grads(model, x[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss {loss}")
            total_loss += loss * len(idx)
            params = (model.w1, model.b1, model.w2, model.b2)
            for v, p, g in zip(velocity, params, grads):
                v *= tc.momentum
                v -= tc.learning_rate * g
                p += v
        epoch_losses.append(total_loss / n)

    train_accuracy = float(np.mean(model.predict(x) == y))
    return TrainResult(model=model, train_accuracy=train_accuracy, epoch_losses=tuple(epoch_losses))


def _round_half_up(v) -> np.ndarray:
    """Round half away from zero (half-up on magnitudes)."""
    return np.sign(v) * np.floor(np.abs(v) + 0.5)


def _quantize_weights(w: np.ndarray) -> tuple[np.ndarray, float]:
    """Symmetric per-layer quantization to integer weights in [-127, 127].

    Computed as w * 127 / max|w| (not w / (max|w|/127)) so exact half
    boundaries like 0.5 of 1.0 -> 63.5 round predictably.
    """
    wmax = float(np.max(np.abs(w)))
    if wmax == 0.0:
        raise DegenerateScaleError("weight layer is all zeros")
    q = np.clip(_round_half_up(w * MAG_MAX / wmax), -MAG_MAX, MAG_MAX).astype(np.int64)
    return q, wmax / MAG_MAX


def _fit_layer_bias(biases: np.ndarray, acc_unit: float) -> tuple[int, np.ndarray]:
    """Layer-wide bias shift plus per-neuron 8-bit bias integers.

    Picks the shift in [0, 13] minimizing the total absolute error of
    |b/acc_unit - q * 2^shift| with q clamped to [-127, 127]; ties go to the
    smaller shift.
    """
    targets = np.asarray(biases, dtype=np.float64) / acc_unit
    best = None
    for shift in range(BIAS_SHIFT_MAX + 1):
        q = np.clip(_round_half_up(targets / (1 << shift)), -MAG_MAX, MAG_MAX)
        err = float(np.abs(targets - q * (1 << shift)).sum())
        if best is None or err < best[0]:
            best = (err, shift, q.astype(np.int64))
    return best[1], best[2]


def _calibrate_act_shift(pre_mags: np.ndarray) -> int:
    """Smallest shift leaving at most CLIP_FRACTION of magnitudes above 127."""
    budget = CLIP_FRACTION * pre_mags.size
    for shift in range(21):
        if np.count_nonzero((pre_mags >> shift) > MAG_MAX) <= budget:
            return shift
    return 20


def _as_signmag(v: int) -> SignMag8:
    return SignMag8(1 if v < 0 else 0, abs(int(v)))


def quantize_model(
    model: FloatMlp, calibration01: np.ndarray, feature_indices
) -> NetworkModel:
    """Post-training quantization to the hardware number formats.

    calibration01: at least 1000 training feature vectors scaled to [0, 1]
    (the same scaling train_float sees); used to pick the hidden saturation
    shift under exact arithmetic.  feature_indices: the 62 pooled-grid
    indices this model expects, persisted so inference is self-contained.
    """
    cal = np.asarray(calibration01, dtype=np.float64)
    if cal.ndim != 2 or cal.shape[1] != N_INPUTS or cal.shape[0] < 1000:
        raise ValueError(f"calibration set must be at least (1000, {N_INPUTS})")

    w1_q, s1 = _quantize_weights(model.w1)
    w2_q, s2 = _quantize_weights(model.w2)

    # hidden accumulator unit: one input step times one weight step
    acc_unit1 = s1 * INPUT_SCALE
    hb_shift, hidden_bias_q = _fit_layer_bias(model.b1, acc_unit1)

    # integer pre-activations over the calibration set (exact mode)
    cal_mags = _round_half_up(cal * MAG_MAX).astype(np.int64)
    pre = cal_mags @ w1_q.T + (hidden_bias_q << hb_shift)
    pre = np.clip(pre, -ACC_MAX, ACC_MAX)
    act_shift = _calibrate_act_shift(np.abs(pre))

    # output accumulator unit: one activation step times one weight step
    acc_unit2 = s2 * (acc_unit1 * (1 << act_shift))
    ob_shift, output_bias_q = _fit_layer_bias(model.b2, acc_unit2)

    hidden = tuple(
        NeuronParams(
            weights=tuple(_as_signmag(v) for v in w1_q[j]),
            bias=_as_signmag(hidden_bias_q[j]),
            bias_shift=hb_shift,
            act_shift=act_shift,
        )
        for j in range(N_HIDDEN)
    )
    output = tuple(
        NeuronParams(
            weights=tuple(_as_signmag(v) for v in w2_q[k]),
            bias=_as_signmag(output_bias_q[k]),
            bias_shift=ob_shift,
            act_shift=0,
        )
        for k in range(N_OUTPUTS)
    )
    return NetworkModel(
        feature_indices=tuple(int(i) for i in feature_indices),
        hidden=hidden,
        output=output,
    )


def dequantize(model: NetworkModel) -> FloatMlp:
    """Reconstruct a float model from the integer grid.

    The file stores no float scales, so the canonical grid scale 1/127 is
    used per layer: weights land in [-1, 1] and biases are mapped back
    through the same accumulator-unit algebra quantize_model uses.
    Re-quantizing the result reproduces the integer weights exactly.
    """
    s1 = s2 = 1.0 / MAG_MAX
    acc_unit1 = s1 * INPUT_SCALE
    acc_unit2 = s2 * (acc_unit1 * (1 << model.hidden_act_shift))
    w1 = np.array([[w.value for w in n.weights] for n in model.hidden], dtype=np.float64) * s1
    w2 = np.array([[w.value for w in n.weights] for n in model.output], dtype=np.float64) * s2
    b1 = np.array(
        [n.bias.value << n.bias_shift for n in model.hidden], dtype=np.float64
    ) * acc_unit1
    b2 = np.array(
        [n.bias.value << n.bias_shift for n in model.output], dtype=np.float64
    ) * acc_unit2
    return FloatMlp(w1=w1, b1=b1, w2=w2, b2=b2)


def export_model(model: NetworkModel, path) -> None:
    """Write the binary model file.

    Layout (little-endian): magic "AMLP" | u16 version | u16 n_in | u16
    n_hidden | u16 n_out | u8 hidden act_shift | u8 hidden bias_shift | u8
    output bias_shift | u8 reserved | 62 x u16 feature indices | 30x62 hidden
    weight bytes (row-major sign-magnitude) | 30 hidden bias bytes | 10x30
    output weight bytes | 10 output bias bytes | u32 CRC32 of everything
    before it.
    """
    out = bytearray()
    out += MODEL_MAGIC
    out += struct.pack(
        "<HHHHBBBB",
        MODEL_VERSION,
        N_INPUTS,
        N_HIDDEN,
        N_OUTPUTS,
        model.hidden_act_shift,
        model.hidden_bias_shift,
        model.output_bias_shift,
        0,
    )
    out += struct.pack(f"<{N_INPUTS}H", *model.feature_indices)
    for layer in (model.hidden, model.output):
        for neuron in layer:
            out += bytes(w.to_byte() for w in neuron.weights)
        out += bytes(neuron.bias.to_byte() for neuron in layer)
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    Path(path).write_bytes(bytes(out))


def _expected_size(n_in: int, n_hidden: int, n_out: int) -> int:
    return 16 + 2 * n_in + (n_hidden * n_in + n_hidden) + (n_out * n_hidden + n_out) + 4


def import_model(path) -> NetworkModel:
    """Read and validate a model file; see export_model for the layout."""
    data = Path(path).read_bytes()
    if len(data) < 16:
        raise ModelTruncatedError(f"file is {len(data)} bytes, header needs 16")
    if data[:4] != MODEL_MAGIC:
        raise ModelMagicError(f"bad magic {data[:4]!r}, expected {MODEL_MAGIC!r}")
    version, n_in, n_hidden, n_out, act_shift, hb_shift, ob_shift, _ = struct.unpack(
        "<HHHHBBBB", data[4:16]
    )
    if version != MODEL_VERSION:
        raise ModelVersionError(f"unsupported version {version}, expected {MODEL_VERSION}")
    if (n_in, n_hidden, n_out) != (N_INPUTS, N_HIDDEN, N_OUTPUTS):
        raise ModelFormatError(f"unsupported topology {n_in}-{n_hidden}-{n_out}")
    expected = _expected_size(n_in, n_hidden, n_out)
    if len(data) != expected:
        raise ModelTruncatedError(f"file is {len(data)} bytes, layout implies {expected}")
    stored_crc = struct.unpack("<I", data[-4:])[0]
    actual_crc = zlib.crc32(data[:-4])
    if stored_crc != actual_crc:
        raise ModelChecksumError(
            f"CRC mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}"
        )

    offset = 16
    indices = struct.unpack_from(f"<{n_in}H", data, offset)
    offset += 2 * n_in

    def take(count: int) -> bytes:
        nonlocal offset
        chunk = data[offset : offset + count]
        offset += count
        return chunk

    hidden_w = take(n_hidden * n_in)
    hidden_b = take(n_hidden)
    output_w = take(n_out * n_hidden)
    output_b = take(n_out)

    try:
        hidden = tuple(
            NeuronParams(
                weights=tuple(
                    SignMag8.from_byte(b) for b in hidden_w[j * n_in : (j + 1) * n_in]
                ),
                bias=SignMag8.from_byte(hidden_b[j]),
                bias_shift=hb_shift,
                act_shift=act_shift,
            )
            for j in range(n_hidden)
        )
        output = tuple(
            NeuronParams(
                weights=tuple(
                    SignMag8.from_byte(b)
                    for b in output_w[k * n_hidden : (k + 1) * n_hidden]
                ),
                bias=SignMag8.from_byte(output_b[k]),
                bias_shift=ob_shift,
                act_shift=0,
            )
            for k in range(n_out)
        )
        return NetworkModel(
            feature_indices=tuple(int(i) for i in indices),
            hidden=hidden,
            output=output,
            version=version,
        )
    except ValueError as exc:
        raise ModelFormatError(f"invalid model contents: {exc}") from exc
