"""Desk-scale replication: two small MLPs on an ellipse classification task.

Trains 2 -> hidden (ReLU) -> 1 (sigmoid) networks with Adam on binary
cross-entropy, re-projecting each hidden weight row to unit L2 norm after
every optimizer step so the hidden layer is born canonicalized. Training
is plain float64 numpy, deterministic given the config seed, so repeat
runs produce bit-identical weights.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateData, ShapeError
from .matching import LayerComparisonReport, compare_layers
from .model_io import Layer, Network, forward
from .rng import SplitMix64, derive_stream
from .sampling import SampleSet, generate_lhs
from .sketching import build_hash_family

# clamp for log() inside the cross-entropy
PROB_FLOOR = 1e-12

# ellipse x1^2/9 + x2^2/16 = 1: interior is class 1
ELLIPSE_A2 = 9.0
ELLIPSE_B2 = 16.0

DEFAULT_BOUNDS = [(-10.0, 10.0), (-10.0, 10.0)]


@dataclass(frozen=True)
class TrainConfig:
    hidden_width: int = 32
    epochs: int = 20
    batch_size: int = 32
    learning_rate: float = 1e-3
    optimizer: str = "adam"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    train_fraction: float = 0.8

    def __post_init__(self):
        if self.hidden_width < 1:
            raise ValueError("hidden_width must be >= 1")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie strictly inside (0, 1)")
        if self.optimizer != "adam":
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


@dataclass(frozen=True)
class TrainResult:
    network: Network
    test_accuracy: float
    epoch_losses: list[float]  # training-split BCE after each epoch


@dataclass(frozen=True)
class ReplicationResult:
    report: LayerComparisonReport
    net_a: Network
    net_b: Network
    accuracy_a: float
    accuracy_b: float


def generate_ellipse_labels(points: SampleSet) -> np.ndarray:
    """1 for points strictly inside the ellipse, 0 on or outside."""
    if points.d_in != 2:
        raise ShapeError(f"ellipse task needs 2-D points, got {points.d_in}-D")
    x1, x2 = points.points[:, 0], points.points[:, 1]
    return (x1**2 / ELLIPSE_A2 + x2**2 / ELLIPSE_B2 - 1.0 < 0.0).astype(np.int64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def bce_loss(probs: np.ndarray, labels: np.ndarray) -> float:
    p = np.clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    return float(-np.mean(labels * np.log(p) + (1.0 - labels) * np.log1p(-p)))


def _glorot_rows(stream: SplitMix64, n_out: int, n_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / (n_in + n_out))
    u = np.array([stream.next_float() for _ in range(n_out * n_in)])
    return (2.0 * u - 1.0).reshape(n_out, n_in) * limit


def _renormalize_rows(w: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(w, axis=1, keepdims=True)
    return w / np.where(norms == 0.0, 1.0, norms)


class _Adam:
    def __init__(self, shapes, config: TrainConfig):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0
        self.cfg = config

    def step(self, params, grads):
        self.t += 1
        c = self.cfg
        corr1 = 1.0 - c.adam_beta1**self.t
        corr2 = 1.0 - c.adam_beta2**self.t
        for i, (p, g) in enumerate(zip(params, grads)):
            self.m[i] = c.adam_beta1 * self.m[i] + (1.0 - c.adam_beta1) * g
            self.v[i] = c.adam_beta2 * self.v[i] + (1.0 - c.adam_beta2) * g * g
            p -= c.learning_rate * (self.m[i] / corr1) / (np.sqrt(self.v[i] / corr2) + c.adam_eps)


def train_mlp(points: SampleSet, labels: np.ndarray, config: TrainConfig) -> TrainResult:
    """Train one constrained MLP; deterministic for a fixed (points, labels, config)."""
    x = points.points
    y = np.asarray(labels, dtype=np.float64)
    if x.shape[0] != y.shape[0]:
        raise ShapeError(f"{x.shape[0]} points but {y.shape[0]} labels")
    if len(np.unique(y)) < 2:
        raise DegenerateData("labels contain a single class")

    init_stream = SplitMix64(derive_stream(config.seed, 0))
    split_stream = SplitMix64(derive_stream(config.seed, 1))
    batch_stream = SplitMix64(derive_stream(config.seed, 2))

    h = config.hidden_width
    w1 = _renormalize_rows(_glorot_rows(init_stream, h, x.shape[1]))
    b1 = np.zeros(h)
    w2 = _glorot_rows(init_stream, 1, h)
    b2 = np.zeros(1)

    order = split_stream.permutation(x.shape[0])
    n_train = int(round(config.train_fraction * x.shape[0]))
    train_idx, test_idx = order[:n_train], order[n_train:]
    x_train, y_train = x[train_idx], y[train_idx]
    x_test, y_test = x[test_idx], y[test_idx]

    adam = _Adam([w1.shape, b1.shape, w2.shape, b2.shape], config)
    epoch_losses: list[float] = []

    def predict(inputs: np.ndarray) -> np.ndarray:
        hidden = np.maximum(inputs @ w1.T + b1, 0.0)
        return _sigmoid(hidden @ w2.T + b2)[:, 0]

    for _ in range(config.epochs):
        epoch_order = batch_stream.permutation(n_train)
        for lo in range(0, n_train, config.batch_size):
            idx = epoch_order[lo : lo + config.batch_size]
            xb, yb = x_train[idx], y_train[idx]

            z1 = xb @ w1.T + b1
            hb = np.maximum(z1, 0.0)
            p = _sigmoid(hb @ w2.T + b2)[:, 0]

            dz2 = (p - yb)[:, None] / len(yb)
            g_w2 = dz2.T @ hb
            g_b2 = dz2.sum(axis=0)
            dh = dz2 @ w2
            dz1 = dh * (z1 > 0.0)
            g_w1 = dz1.T @ xb
            g_b1 = dz1.sum(axis=0)

            adam.step([w1, b1, w2, b2], [g_w1, g_b1, g_w2, g_b2])
            w1 = _renormalize_rows(w1)
        epoch_losses.append(bce_loss(predict(x_train), y_train))

    network = Network(
        [Layer(w1, b1, "relu"), Layer(w2, b2, "sigmoid")]
    )
    accuracy = float(np.mean((predict(x_test) > 0.5) == y_test))
    return TrainResult(network, accuracy, epoch_losses)


def evaluate_accuracy(network: Network, points: SampleSet, labels: np.ndarray) -> float:
    probs = forward(network, points.points)[:, 0]
    return float(np.mean((probs > 0.5) == np.asarray(labels)))


def run_replication(
    seed_a: int,
    seed_b: int,
    n_samples: int = 16000,
    k: int = 512,
    sample_seed: int = 42,
    master_seed: int = 42,
    config: TrainConfig | None = None,
    n_threads: int = 1,
) -> ReplicationResult:
    """Generate the task, train two nets, and compare their hidden layers.

    The probe sample doubles as training data; the comparison runs with
    the exact-Jaccard validation path enabled.
    """
    samples = generate_lhs(n_samples, DEFAULT_BOUNDS, sample_seed)
    labels = generate_ellipse_labels(samples)
    base = config or TrainConfig()
    result_a = train_mlp(points=samples, labels=labels, config=_with_seed(base, seed_a))
    result_b = train_mlp(points=samples, labels=labels, config=_with_seed(base, seed_b))

    family = build_hash_family(k, master_seed)
    report = compare_layers(
        result_a.network,
        result_b.network,
        layer_index=0,
        samples=samples,
        family=family,
        exact=True,
        n_threads=n_threads,
    )
    params = dict(report.params)
    params.update(
        {
            "train_seed_a": seed_a,
            "train_seed_b": seed_b,
            "test_accuracy_a": result_a.test_accuracy,
            "test_accuracy_b": result_b.test_accuracy,
            "epochs": base.epochs,
        }
    )
    report = LayerComparisonReport(
        layer_distance=report.layer_distance,
        matching=report.matching,
        cost_matrix=report.cost_matrix,
        filter_a=report.filter_a,
        filter_b=report.filter_b,
        unmatched_a=report.unmatched_a,
        unmatched_b=report.unmatched_b,
        params=params,
        validation=report.validation,
    )
    return ReplicationResult(
        report, result_a.network, result_b.network, result_a.test_accuracy, result_b.test_accuracy
    )


def _with_seed(config: TrainConfig, seed: int) -> TrainConfig:
    return replace(config, seed=seed)
