"""Shared fixtures: the ellipse-task sample and trained network pair.

Training the two replication networks dominates suite runtime, so they
are built once per session and shared by the experiment, matching, and
acceptance tests.
"""

from __future__ import annotations

import numpy as np
import pytest

from layerdist import (
    Layer,
    Network,
    SampleSet,
    SignatureMatrix,
    TrainConfig,
    generate_ellipse_labels,
    run_replication,
    train_mlp,
)
from layerdist.sampling import generate_lhs
from layerdist.signatures import pack_bits


def make_signature_matrix(rows) -> SignatureMatrix:
    """Build a SignatureMatrix from plain 0/1 row lists."""
    bits = np.asarray(rows, dtype=bool)
    return SignatureMatrix(pack_bits(bits), bits.shape[0], bits.shape[1])


def random_relu_network(rng: np.random.Generator, widths) -> Network:
    """Random net with relu hidden layers and a linear output layer."""
    layers = []
    for k in range(len(widths) - 1):
        w = rng.normal(size=(widths[k + 1], widths[k]))
        b = rng.normal(size=widths[k + 1])
        layers.append(Layer(w, b, "relu" if k < len(widths) - 2 else "linear"))
    return Network(layers)


@pytest.fixture(scope="session")
def ellipse_sample() -> SampleSet:
    return generate_lhs(16000, [(-10.0, 10.0), (-10.0, 10.0)], 42)


@pytest.fixture(scope="session")
def ellipse_labels(ellipse_sample) -> np.ndarray:
    return generate_ellipse_labels(ellipse_sample)


@pytest.fixture(scope="session")
def trained_net_1(ellipse_sample, ellipse_labels):
    return train_mlp(ellipse_sample, ellipse_labels, TrainConfig(seed=1))


@pytest.fixture(scope="session")
def trained_net_2(ellipse_sample, ellipse_labels):
    return train_mlp(ellipse_sample, ellipse_labels, TrainConfig(seed=2))


@pytest.fixture(scope="session")
def replication():
    return run_replication(seed_a=1, seed_b=2, n_samples=16000, k=512)
