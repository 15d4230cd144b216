"""Framework adapters producing weight interchange JSON.

The interchange file stores weights row-per-neuron: weights[j][i] is the
weight from input i into neuron j. Keras Dense kernels are stored
input-major (in, out) and must be transposed; torch Linear weights are
already (out, in). Each adapter is verified against the source framework's
own forward pass by the test suite, never trusted on orientation.

Frameworks are imported lazily so the package works with whichever one is
installed.
"""

from __future__ import annotations

import json

import numpy as np

FORMAT_VERSION = 1

ACTIVATIONS = ("relu", "sigmoid", "linear")


class ExportError(Exception):
    """Base class for conversion failures."""


class UnsupportedLayer(ExportError):
    """Checkpoint contains a layer kind the interchange format cannot hold."""


class AmbiguousActivation(ExportError):
    """Activation cannot be mapped onto relu/sigmoid/linear."""


def _write_interchange(layers: list[dict], output_path) -> None:
    for layer in layers:
        w = np.asarray(layer["weights"], dtype=np.float64)
        b = np.asarray(layer["bias"], dtype=np.float64)
        if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
            raise ExportError(f"inconsistent layer shapes: {w.shape} vs {b.shape}")
        layer["weights"] = w.tolist()
        layer["bias"] = b.tolist()
    doc = {"format_version": FORMAT_VERSION, "layers": layers}
    with open(output_path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def export_keras(input_path, output_path) -> None:
    """Export a saved Keras model (.keras or .h5) with Dense layers only."""
    from tensorflow import keras

    model = keras.models.load_model(input_path, compile=False)
    layers: list[dict] = []
    pending = None  # Dense exported with activation "linear", awaiting a merge

    def flush():
        nonlocal pending
        if pending is not None:
            layers.append(pending)
            pending = None

    for layer in model.layers:
        name = type(layer).__name__
        if name == "InputLayer":
            continue
        if name == "Dense":
            flush()
            kernel, bias = layer.get_weights()
            activation = getattr(layer.activation, "__name__", str(layer.activation))
            entry = {
                "weights": np.asarray(kernel).T,
                "bias": np.asarray(bias),
                "activation": activation,
            }
            if activation == "linear":
                pending = entry  # a following Activation/ReLU layer may claim it
            elif activation in ACTIVATIONS:
                layers.append(entry)
            else:
                raise AmbiguousActivation(
                    f"layer {layer.name!r}: activation {activation!r} has no "
                    f"interchange equivalent"
                )
        elif name in ("Activation", "ReLU"):
            if pending is None:
                raise UnsupportedLayer(
                    f"standalone activation layer {layer.name!r} without a "
                    f"preceding linear Dense"
                )
            activation = (
                "relu" if name == "ReLU"
                else getattr(layer.activation, "__name__", str(layer.activation))
            )
            if activation not in ACTIVATIONS:
                raise AmbiguousActivation(
                    f"layer {layer.name!r}: activation {activation!r} has no "
                    f"interchange equivalent"
                )
            pending["activation"] = activation
            flush()
        else:
            raise UnsupportedLayer(f"layer {layer.name!r} of type {name} is not dense")
    flush()
    if not layers:
        raise ExportError(f"{input_path}: no dense layers found")
    _write_interchange(layers, output_path)


def export_torch(input_path, output_path) -> None:
    """Export a pickled torch module built from Linear + ReLU/Sigmoid parts."""
    import torch
    from torch import nn

    model = torch.load(input_path, map_location="cpu", weights_only=False)
    if isinstance(model, dict):
        raise ExportError(
            f"{input_path} holds a bare state_dict; activations are not "
            f"recoverable from it, save the full module instead"
        )
    if not isinstance(model, nn.Module):
        raise ExportError(f"{input_path} does not contain a torch module")

    def leaves(module):
        children = list(module.children())
        if not children:
            yield module
        for child in children:
            yield from leaves(child)

    layers: list[dict] = []
    pending = None

    def flush():
        nonlocal pending
        if pending is not None:
            layers.append(pending)
            pending = None

    for module in leaves(model):
        if isinstance(module, nn.Linear):
            flush()
            pending = {
                "weights": module.weight.detach().cpu().numpy(),
                "bias": (
                    module.bias.detach().cpu().numpy()
                    if module.bias is not None
                    else np.zeros(module.out_features)
                ),
                "activation": "linear",
            }
        elif isinstance(module, nn.ReLU):
            if pending is None:
                raise UnsupportedLayer("activation module without a preceding Linear")
            pending["activation"] = "relu"
            flush()
        elif isinstance(module, nn.Sigmoid):
            if pending is None:
                raise UnsupportedLayer("activation module without a preceding Linear")
            pending["activation"] = "sigmoid"
            flush()
        elif isinstance(module, (nn.Identity, nn.Dropout)):
            continue  # inference no-ops
        elif type(module).__name__ in ("Tanh", "GELU", "SiLU", "ELU", "LeakyReLU",
                                       "Softmax", "Hardtanh"):
            raise AmbiguousActivation(
                f"activation {type(module).__name__} has no interchange equivalent"
            )
        else:
            raise UnsupportedLayer(f"module {type(module).__name__} is not dense")
    flush()
    if not layers:
        raise ExportError(f"{input_path}: no Linear modules found")
    _write_interchange(layers, output_path)


def export_checkpoint(input_path, framework_hint: str, output_path) -> None:
    """Dispatch on the framework hint ("keras" or "torch")."""
    if framework_hint == "keras":
        export_keras(input_path, output_path)
    elif framework_hint == "torch":
        export_torch(input_path, output_path)
    else:
        raise ExportError(f"unknown framework {framework_hint!r}; expected keras or torch")
