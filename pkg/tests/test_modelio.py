import json
import struct

import numpy as np
import pytest

from steertest.engine import Conv2D, Dense, forward
from steertest.errors import FormatError, ModelValidationError
from steertest.modelio import load_model, save_model
from steertest.synth import make_model


def _dense_container(weights=(1.0, 1.0, 0.0)):
    # hand-built smallest container: one Dense(2->1, linear)
    blob = b"DTNN" + struct.pack("<HH", 1, 1)
    blob += bytes([1]) + struct.pack("<3I", 2, 1, 3)
    blob += struct.pack("<Q", 2) + struct.pack("<2f", weights[0], weights[1])
    blob += struct.pack("<Q", 1) + struct.pack("<f", weights[2])
    return blob


def test_load_smallest_model(tmp_path):
    path = tmp_path / "m.dtnn"
    path.write_bytes(_dense_container())
    model = load_model(path)
    assert len(model.layers) == 1
    assert model.layers[0] == Dense(2, 1, "linear")
    pred, _ = forward(model, np.array([0.3, 0.7], np.float32))
    assert pred == pytest.approx(1.0)
    # the hand-built container round-trips byte-for-byte too
    save_model(model, tmp_path / "again.dtnn")
    assert (tmp_path / "again.dtnn").read_bytes() == _dense_container()


def test_roundtrip_byte_identical(tmp_path):
    for kind in ("cnn", "lstm", "zero"):
        src = tmp_path / f"{kind}.dtnn"
        save_model(make_model(kind, seed=4, image_hw=(16, 16)), src)
        reloaded = load_model(src)
        dst = tmp_path / f"{kind}2.dtnn"
        save_model(reloaded, dst)
        assert src.read_bytes() == dst.read_bytes()


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.dtnn"
    path.write_bytes(b"\x00NND" + b"\x00" * 16)
    with pytest.raises(FormatError):
        load_model(path)


def test_truncated_file(tmp_path):
    path = tmp_path / "trunc.dtnn"
    path.write_bytes(_dense_container()[:-3])
    with pytest.raises(FormatError):
        load_model(path)


def test_unsupported_version(tmp_path):
    blob = bytearray(_dense_container())
    blob[4:6] = struct.pack("<H", 9)
    path = tmp_path / "v9.dtnn"
    path.write_bytes(bytes(blob))
    with pytest.raises(FormatError):
        load_model(path)


def test_nonfinite_weight_rejected(tmp_path):
    path = tmp_path / "nan.dtnn"
    path.write_bytes(_dense_container(weights=(float("nan"), 1.0, 0.0)))
    with pytest.raises(ModelValidationError):
        load_model(path)


def test_shape_chain_mismatch(tmp_path):
    # Conv2D whose out_channels disagree with the following Dense in_units
    model = make_model("cnn", seed=0, image_hw=(16, 16))
    conv = model.layers[0]
    bad_dense = Dense(999, 1, "linear")
    with pytest.raises(ModelValidationError):
        from steertest.engine import Model
        Model("bad", [conv, bad_dense],
              [model.weights[0],
               (np.zeros((999, 1), np.float32), np.zeros(1, np.float32))])


def test_json_sidecar(tmp_path):
    doc = {
        "name": "fixture",
        "layers": [
            {"kind": "dense", "in_units": 2, "out_units": 1,
             "activation": "linear", "weights": [[[2.0], [3.0]], [0.5]]},
        ],
    }
    path = tmp_path / "fixture.json"
    path.write_text(json.dumps(doc))
    model = load_model(path)
    assert model.name == "fixture"
    pred, _ = forward(model, np.array([1.0, 1.0], np.float32))
    assert pred == pytest.approx(5.5)


def test_json_garbage_rejected(tmp_path):
    path = tmp_path / "noise.bin"
    path.write_bytes(b"\x89PNG not a model")
    with pytest.raises(FormatError):
        load_model(path)


def test_conv_param_block_roundtrip(tmp_path):
    model = make_model("cnn", seed=7, image_hw=(16, 16))
    path = tmp_path / "c.dtnn"
    save_model(model, path)
    again = load_model(path)
    assert again.layers == model.layers
    assert again.fingerprint == model.fingerprint
    assert isinstance(again.layers[0], Conv2D)
    for lw_a, lw_b in zip(again.weights, model.weights):
        for a, b in zip(lw_a, lw_b):
            assert np.array_equal(a, b)
