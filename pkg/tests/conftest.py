import os
from pathlib import Path

import numpy as np
import pytest

from amlpsim import dataset, trainer
from amlpsim.dataset import TEST_IMAGES, TEST_LABELS, TRAIN_IMAGES, TRAIN_LABELS
from amlpsim.datapath import N_HIDDEN, N_INPUTS, N_OUTPUTS, NetworkModel
from amlpsim.fixedpoint import SignMag8
from amlpsim.mac_neuron import NeuronParams
from amlpsim.trainer import TrainConfig


def _mnist_dir() -> Path | None:
    candidate = Path(os.environ.get("MNIST_DIR", "/root/mnist"))
    names = (TRAIN_IMAGES, TRAIN_LABELS, TEST_IMAGES, TEST_LABELS)
    if all((candidate / n).exists() or (candidate / (n + ".gz")).exists() for n in names):
        return candidate
    return None


@pytest.fixture(scope="session")
def mnist_dir() -> Path:
    found = _mnist_dir()
    if found is None:
        pytest.skip("MNIST IDX files not found (set MNIST_DIR or populate /root/mnist)")
    return found


@pytest.fixture(scope="session")
def mnist(mnist_dir):
    """Loaded splits plus the full reduction pipeline, shared per session."""
    train_images, train_labels = dataset.load_split(mnist_dir, train=True)
    test_images, test_labels = dataset.load_split(mnist_dir, train=False)
    pooled = dataset.pool2x2_batch(train_images)
    indices = dataset.select_features(pooled)
    x_train = dataset.quantize_input(pooled, indices)
    x_test = dataset.prepare_features(test_images, indices)
    return {
        "indices": indices,
        "x_train": x_train,
        "y_train": train_labels,
        "x_test": x_test,
        "y_test": test_labels,
    }


@pytest.fixture(scope="session")
def trained(mnist):
    """Default-hyperparameter training run (deterministic, seed 42)."""
    return trainer.train_float(mnist["x_train"] / 127.0, mnist["y_train"], TrainConfig())


@pytest.fixture(scope="session")
def quantized(mnist, trained) -> NetworkModel:
    return trainer.quantize_model(
        trained.model, mnist["x_train"][:5000] / 127.0, mnist["indices"]
    )


def sm(v: int) -> SignMag8:
    return SignMag8(1 if v < 0 else 0, abs(v))


def random_neuron(rng, fan_in: int, bias_shift: int, act_shift: int) -> NeuronParams:
    weights = tuple(sm(int(v)) for v in rng.integers(-127, 128, size=fan_in))
    return NeuronParams(
        weights=weights,
        bias=sm(int(rng.integers(-127, 128))),
        bias_shift=bias_shift,
        act_shift=act_shift,
    )


def random_model(seed: int = 0, act_shift: int = 8, bias_shift: int = 4) -> NetworkModel:
    """Synthetic but well-formed network for datapath tests (no MNIST needed)."""
    rng = np.random.default_rng(seed)
    indices = tuple(sorted(rng.choice(196, size=N_INPUTS, replace=False).tolist()))
    hidden = tuple(
        random_neuron(rng, N_INPUTS, bias_shift, act_shift) for _ in range(N_HIDDEN)
    )
    output = tuple(random_neuron(rng, N_HIDDEN, bias_shift, 0) for _ in range(N_OUTPUTS))
    return NetworkModel(feature_indices=indices, hidden=hidden, output=output)


def random_features(rng, n: int) -> np.ndarray:
    return rng.integers(0, 128, size=(n, N_INPUTS)).astype(np.uint8)
