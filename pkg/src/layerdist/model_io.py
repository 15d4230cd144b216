"""Feed-forward network container and JSON interchange format.

A network is an ordered list of dense layers. Layer weights are stored
row-per-neuron: ``weights[j][i]`` is the weight from input ``i`` into
neuron ``j``. The on-disk format is UTF-8 JSON with nested arrays; floats
are serialized with shortest round-trip precision so save followed by
load is the identity on finite doubles.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ParseError, ShapeError

FORMAT_VERSION = 1

ACTIVATIONS = ("relu", "sigmoid", "linear")


@dataclass(frozen=True)
class Layer:
    weights: np.ndarray  # (n_neurons, d_in), float64
    bias: np.ndarray  # (n_neurons,), float64
    activation: str

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        b = np.asarray(self.bias, dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1:
            raise ShapeError(f"weights must be 2-D and bias 1-D, got {w.shape} / {b.shape}")
        if w.shape[0] != b.shape[0]:
            raise ShapeError(f"{w.shape[0]} weight rows but {b.shape[0]} bias entries")
        if self.activation not in ACTIVATIONS:
            raise ParseError(f"unknown activation {self.activation!r}")
        if not (np.isfinite(w).all() and np.isfinite(b).all()):
            raise ValueError("layer parameters contain NaN or Inf")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def n_neurons(self) -> int:
        return self.weights.shape[0]

    @property
    def d_in(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class Network:
    layers: list[Layer]
    format_version: int = FORMAT_VERSION

    def __post_init__(self):
        if not self.layers:
            raise ShapeError("network needs at least one layer")
        for k in range(len(self.layers) - 1):
            out_w = self.layers[k].n_neurons
            in_w = self.layers[k + 1].d_in
            if out_w != in_w:
                raise ShapeError(
                    f"layer {k} outputs width {out_w} but layer {k + 1} expects {in_w}"
                )

    @property
    def d_in(self) -> int:
        return self.layers[0].d_in

    @property
    def widths(self) -> list[int]:
        return [self.d_in] + [layer.n_neurons for layer in self.layers]


def _apply_activation(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(z, 0.0)
    if activation == "sigmoid":
        # split by sign to avoid overflow in exp
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    return z


def forward(network: Network, inputs: np.ndarray) -> np.ndarray:
    """Evaluate the network on a batch (rows are input vectors)."""
    x = np.asarray(inputs, dtype=np.float64)
    squeeze = x.ndim == 1
    if squeeze:
        x = x[None, :]
    if x.ndim != 2:
        raise ShapeError(f"inputs must be 1-D or 2-D, got shape {x.shape}")
    if x.shape[1] != network.d_in:
        raise ShapeError(f"inputs have width {x.shape[1]}, network expects {network.d_in}")
    for layer in network.layers:
        x = _apply_activation(x @ layer.weights.T + layer.bias, layer.activation)
    return x[0] if squeeze else x


def _layer_from_json(obj: dict, index: int) -> Layer:
    try:
        weights = obj["weights"]
        bias = obj["bias"]
        activation = obj["activation"]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"layer {index}: missing field {exc}") from None
    try:
        w = np.array(weights, dtype=np.float64)
        b = np.array(bias, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"layer {index}: non-numeric entry ({exc})") from None
    if w.ndim != 2 or b.ndim != 1:
        raise ShapeError(f"layer {index}: weights must be a matrix and bias a vector")
    if w.shape[0] != b.shape[0]:
        raise ShapeError(
            f"layer {index}: {w.shape[0]} weight rows but {b.shape[0]} bias entries"
        )
    if not isinstance(activation, str) or activation not in ACTIVATIONS:
        raise ParseError(f"layer {index}: unknown activation {activation!r}")
    return Layer(w, b, activation)


def load_network(path) -> Network:
    """Load and validate a network from interchange JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(doc, dict) or "layers" not in doc:
        raise ParseError(f"{path}: expected an object with a 'layers' field")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ParseError(f"{path}: unsupported format_version {version!r}")
    layers_json = doc["layers"]
    if not isinstance(layers_json, list) or not layers_json:
        raise ParseError(f"{path}: 'layers' must be a non-empty list")
    layers = [_layer_from_json(obj, k) for k, obj in enumerate(layers_json)]
    return Network(layers, format_version=version)


def save_network(network: Network, path) -> None:
    """Write interchange JSON; round-trips bit-exactly through load_network."""
    doc = {
        "format_version": network.format_version,
        "layers": [
            {
                "weights": layer.weights.tolist(),
                "bias": layer.bias.tolist(),
                "activation": layer.activation,
            }
            for layer in network.layers
        ],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")
