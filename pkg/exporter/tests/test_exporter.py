"""Exporter fidelity: source-framework forward vs interchange forward."""

import json

import numpy as np
import pytest

from netexport import AmbiguousActivation, ExportError, UnsupportedLayer, export_checkpoint

torch = pytest.importorskip("torch")
keras = pytest.importorskip("keras")

from torch import nn  # noqa: E402


def interchange_forward(path, inputs):
    """Reference evaluation straight off the interchange JSON."""
    doc = json.loads(open(path).read())
    assert doc["format_version"] == 1
    x = np.asarray(inputs, dtype=np.float64)
    for layer in doc["layers"]:
        w = np.array(layer["weights"], dtype=np.float64)
        b = np.array(layer["bias"], dtype=np.float64)
        z = x @ w.T + b
        act = layer["activation"]
        if act == "relu":
            x = np.maximum(z, 0.0)
        elif act == "sigmoid":
            x = 1.0 / (1.0 + np.exp(-z))
        else:
            assert act == "linear"
            x = z
    return x


def make_torch_model():
    torch.manual_seed(7)
    return nn.Sequential(
        nn.Linear(2, 32), nn.ReLU(),
        nn.Linear(32, 1), nn.Sigmoid(),
    ).double()


def make_keras_model():
    keras.utils.set_random_seed(7)
    model = keras.Sequential([
        keras.layers.Input(shape=(2,)),
        keras.layers.Dense(32, activation="relu", dtype="float64"),
        keras.layers.Dense(1, activation="sigmoid", dtype="float64"),
    ])
    return model


class TestTorchExport:
    def test_forward_fidelity(self, tmp_path):
        model = make_torch_model()
        ckpt = tmp_path / "model.pt"
        torch.save(model, ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "torch", out)

        rng = np.random.default_rng(0)
        x = rng.uniform(-10, 10, size=(100, 2))
        with torch.no_grad():
            expected = model(torch.tensor(x)).numpy()
        got = interchange_forward(out, x)
        np.testing.assert_allclose(got, expected, rtol=1e-6, atol=1e-12)

    def test_loads_in_primary_package(self, tmp_path):
        layerdist = pytest.importorskip("layerdist")
        model = make_torch_model()
        ckpt = tmp_path / "model.pt"
        torch.save(model, ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "torch", out)

        net = layerdist.load_network(out)
        assert net.widths == [2, 32, 1]
        rng = np.random.default_rng(1)
        x = rng.uniform(-10, 10, size=(100, 2))
        with torch.no_grad():
            expected = model(torch.tensor(x)).numpy()
        np.testing.assert_allclose(layerdist.forward(net, x), expected,
                                   rtol=1e-6, atol=1e-12)

    def test_conv_rejected(self, tmp_path):
        model = nn.Sequential(nn.Conv2d(1, 4, 3), nn.ReLU())
        ckpt = tmp_path / "conv.pt"
        torch.save(model, ckpt)
        with pytest.raises(UnsupportedLayer):
            export_checkpoint(ckpt, "torch", tmp_path / "net.json")

    def test_tanh_rejected(self, tmp_path):
        model = nn.Sequential(nn.Linear(2, 4), nn.Tanh(), nn.Linear(4, 1))
        ckpt = tmp_path / "tanh.pt"
        torch.save(model, ckpt)
        with pytest.raises(AmbiguousActivation):
            export_checkpoint(ckpt, "torch", tmp_path / "net.json")

    def test_state_dict_rejected(self, tmp_path):
        ckpt = tmp_path / "sd.pt"
        torch.save(make_torch_model().state_dict(), ckpt)
        with pytest.raises(ExportError):
            export_checkpoint(ckpt, "torch", tmp_path / "net.json")

    def test_trailing_linear_layer(self, tmp_path):
        torch.manual_seed(3)
        model = nn.Sequential(nn.Linear(3, 8), nn.ReLU(), nn.Linear(8, 2)).double()
        ckpt = tmp_path / "lin.pt"
        torch.save(model, ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "torch", out)
        doc = json.loads(out.read_text())
        assert [layer["activation"] for layer in doc["layers"]] == ["relu", "linear"]
        rng = np.random.default_rng(2)
        x = rng.normal(size=(50, 3))
        with torch.no_grad():
            expected = model(torch.tensor(x)).numpy()
        np.testing.assert_allclose(interchange_forward(out, x), expected,
                                   rtol=1e-6, atol=1e-12)

    def test_values_preserved_exactly(self, tmp_path):
        model = make_torch_model()
        ckpt = tmp_path / "model.pt"
        torch.save(model, ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "torch", out)
        doc = json.loads(out.read_text())
        exported = np.array(doc["layers"][0]["weights"])
        source = model[0].weight.detach().numpy()
        np.testing.assert_array_equal(exported, source)


class TestKerasExport:
    def test_forward_fidelity(self, tmp_path):
        model = make_keras_model()
        ckpt = tmp_path / "model.keras"
        model.save(ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "keras", out)

        rng = np.random.default_rng(4)
        x = rng.uniform(-10, 10, size=(100, 2))
        expected = np.asarray(model(x))
        np.testing.assert_allclose(interchange_forward(out, x), expected,
                                   rtol=1e-6, atol=1e-12)

    def test_kernel_orientation_transposed(self, tmp_path):
        # keras stores kernels input-major; the interchange is neuron-major
        model = make_keras_model()
        ckpt = tmp_path / "model.keras"
        model.save(ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "keras", out)
        doc = json.loads(out.read_text())
        kernel = model.layers[0].get_weights()[0]
        assert kernel.shape == (2, 32)
        exported = np.array(doc["layers"][0]["weights"])
        assert exported.shape == (32, 2)
        np.testing.assert_array_equal(exported, kernel.T)

    def test_standalone_activation_merges(self, tmp_path):
        keras.utils.set_random_seed(9)
        model = keras.Sequential([
            keras.layers.Input(shape=(2,)),
            keras.layers.Dense(6, dtype="float64"),
            keras.layers.Activation("relu", dtype="float64"),
            keras.layers.Dense(1, activation="sigmoid", dtype="float64"),
        ])
        ckpt = tmp_path / "model.keras"
        model.save(ckpt)
        out = tmp_path / "net.json"
        export_checkpoint(ckpt, "keras", out)
        doc = json.loads(out.read_text())
        assert [layer["activation"] for layer in doc["layers"]] == ["relu", "sigmoid"]
        rng = np.random.default_rng(5)
        x = rng.normal(size=(40, 2))
        np.testing.assert_allclose(interchange_forward(out, x), np.asarray(model(x)),
                                   rtol=1e-6, atol=1e-12)

    def test_conv_rejected(self, tmp_path):
        model = keras.Sequential([
            keras.layers.Input(shape=(8, 8, 1)),
            keras.layers.Conv2D(2, 3),
        ])
        ckpt = tmp_path / "conv.keras"
        model.save(ckpt)
        with pytest.raises(UnsupportedLayer):
            export_checkpoint(ckpt, "keras", tmp_path / "net.json")

    def test_tanh_rejected(self, tmp_path):
        model = keras.Sequential([
            keras.layers.Input(shape=(2,)),
            keras.layers.Dense(3, activation="tanh"),
        ])
        ckpt = tmp_path / "tanh.keras"
        model.save(ckpt)
        with pytest.raises(AmbiguousActivation):
            export_checkpoint(ckpt, "keras", tmp_path / "net.json")


class TestDispatch:
    def test_unknown_framework(self, tmp_path):
        with pytest.raises(ExportError):
            export_checkpoint(tmp_path / "x.bin", "onnx", tmp_path / "net.json")


class TestCli:
    def test_success_and_data_error_codes(self, tmp_path):
        from netexport.cli import main

        model = make_torch_model()
        ckpt = tmp_path / "model.pt"
        torch.save(model, ckpt)
        out = tmp_path / "net.json"
        assert main(["--in", str(ckpt), "--framework", "torch", "--out", str(out)]) == 0
        assert out.exists()
        missing = tmp_path / "missing.pt"
        assert main(["--in", str(missing), "--framework", "torch",
                     "--out", str(out)]) == 2
