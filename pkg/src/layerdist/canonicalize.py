"""Per-layer L2 weight normalization with downstream compensation.

Each hidden neuron's incoming weight row is rescaled to unit L2 norm and
its bias divided by the same factor; the factor is multiplied into the
matching column of the next layer so the network function is unchanged
(ReLU and linear activations commute with positive scaling). The output
layer only absorbs compensation and is never normalized itself, since
there is no later layer to push its scale into.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UnsupportedActivation
from .model_io import Layer, Network

# rows with L2 norm below this are treated as exact zero (constant neurons)
ZERO_NORM_THRESHOLD = 1e-300

HOMOGENEOUS = ("relu", "linear")


@dataclass(frozen=True)
class ScaleFactors:
    """Positive per-neuron factors removed from a layer's parameters."""

    values: np.ndarray  # (n_neurons,), float64, all > 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise ShapeError("scale factors must form a vector")
        if not (v > 0).all():
            raise ValueError("scale factors must be strictly positive")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


def normalize_layer(layer: Layer) -> tuple[Layer, ScaleFactors]:
    """Rescale each neuron to unit weight norm; zero rows pass through with factor 1."""
    norms = np.linalg.norm(layer.weights, axis=1)
    if not np.isfinite(norms).all():
        raise ValueError("layer contains non-finite weights")
    zero = norms < ZERO_NORM_THRESHOLD
    scales = np.where(zero, 1.0, norms)
    weights = layer.weights / scales[:, None]
    bias = layer.bias / scales
    return Layer(weights, bias, layer.activation), ScaleFactors(scales)


def compensate_next_layer(next_layer: Layer, scales: ScaleFactors) -> Layer:
    """Fold a layer's scale factors into the columns of its successor."""
    if next_layer.d_in != len(scales):
        raise ShapeError(
            f"layer expects {next_layer.d_in} inputs but got {len(scales)} scale factors"
        )
    return Layer(next_layer.weights * scales.values[None, :], next_layer.bias,
                 next_layer.activation)


def canonicalize_network(network: Network) -> tuple[Network, list[ScaleFactors]]:
    """Normalize all hidden layers in ascending order, compensating each successor.

    The network function is preserved exactly (up to float rounding) when
    every hidden activation is positively homogeneous; anything else is
    rejected rather than silently skipped.
    """
    for k, layer in enumerate(network.layers[:-1]):
        if layer.activation not in HOMOGENEOUS:
            raise UnsupportedActivation(
                f"hidden layer {k} uses {layer.activation!r}; scaling cannot be "
                f"compensated through it"
            )
    layers = list(network.layers)
    all_scales: list[ScaleFactors] = []
    for k in range(len(layers) - 1):
        layers[k], scales = normalize_layer(layers[k])
        layers[k + 1] = compensate_next_layer(layers[k + 1], scales)
        all_scales.append(scales)
    return Network(layers, format_version=network.format_version), all_scales
