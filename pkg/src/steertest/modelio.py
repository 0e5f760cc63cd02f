"""DTNN model container: binary format plus a JSON sidecar for fixtures.

Binary layout (all integers little-endian):

    magic "DTNN" (4 bytes) | version u16 | layer count u16
    per layer:
        kind tag u8 (1=Dense, 2=Conv2D, 3=Flatten, 4=LSTM)
        parameter block, fixed-order u32 fields:
            Dense : in_units, out_units, activation
            Conv2D: in_h, in_w, in_channels, out_channels,
                    kernel_h, kernel_w, stride, padding, activation
            Flatten: (none)
            LSTM  : input_dim, hidden_units, timesteps
        weight tensors, each as u64 count + count f32 values, row-major:
            Dense : W (in,out), b (out)
            Conv2D: K (out,in,kh,kw), b (out)
            LSTM  : W (in,4h), U (h,4h), b (4h); gate blocks [i, f, g, o]

Activation codes: 0=relu, 1=tanh, 2=sigmoid, 3=linear. Padding codes:
0=valid, 1=same. The container carries no model name; loaders use the file
stem. A file is read as JSON when it does not start with the magic bytes;
the JSON mirrors the same structure with symbolic names plus an optional
"name" key.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .engine import Conv2D, Dense, Flatten, LayerSpec, Lstm, Model, _expected_weight_shapes
from .errors import FormatError, ModelValidationError

MAGIC = b"DTNN"
VERSION = 1

_KIND_TAGS = {Dense: 1, Conv2D: 2, Flatten: 3, Lstm: 4}
_ACT_CODES = {"relu": 0, "tanh": 1, "sigmoid": 2, "linear": 3}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}
_PAD_CODES = {"valid": 0, "same": 1}
_PAD_NAMES = {v: k for k, v in _PAD_CODES.items()}


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise FormatError("truncated DTNN file")
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack("<H", self.take(2))[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def f32s(self, count: int) -> np.ndarray:
        raw = self.take(4 * count)
        return np.frombuffer(raw, dtype="<f4").astype(np.float32)


def _read_spec(r: _Reader) -> LayerSpec:
    tag = r.u8()
    if tag == 1:
        i, o, a = r.u32(), r.u32(), r.u32()
        if a not in _ACT_NAMES:
            raise FormatError(f"unknown activation code {a}")
        return Dense(i, o, _ACT_NAMES[a])
    if tag == 2:
        vals = [r.u32() for _ in range(9)]
        if vals[7] not in _PAD_NAMES:
            raise FormatError(f"unknown padding code {vals[7]}")
        if vals[8] not in _ACT_NAMES:
            raise FormatError(f"unknown activation code {vals[8]}")
        return Conv2D(vals[0], vals[1], vals[2], vals[3], vals[4], vals[5],
                      vals[6], _PAD_NAMES[vals[7]], _ACT_NAMES[vals[8]])
    if tag == 3:
        return Flatten()
    if tag == 4:
        return Lstm(r.u32(), r.u32(), r.u32())
    raise FormatError(f"unknown layer kind tag {tag}")


def _read_weights(r: _Reader, spec: LayerSpec):
    weights = []
    for shape in _expected_weight_shapes(spec):
        count = r.u64()
        want = int(np.prod(shape))
        if count != want:
            raise ModelValidationError(
                f"weight tensor holds {count} values, layer needs {want}")
        weights.append(r.f32s(count).reshape(shape))
    return tuple(weights)


def _load_binary(data: bytes, name_hint: str) -> Model:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise FormatError("bad magic bytes")
    version = r.u16()
    if version != VERSION:
        raise FormatError(f"unsupported DTNN version {version}")
    n_layers = r.u16()
    layers, weights = [], []
    for _ in range(n_layers):
        spec = _read_spec(r)
        layers.append(spec)
        weights.append(_read_weights(r, spec))
    if r.pos != len(data):
        raise FormatError("trailing bytes after last layer")
    return Model(name_hint, layers, weights)


def _spec_from_json(entry: dict) -> LayerSpec:
    kind = entry.get("kind")
    try:
        if kind == "dense":
            return Dense(int(entry["in_units"]), int(entry["out_units"]),
                         entry["activation"])
        if kind == "conv2d":
            return Conv2D(int(entry["in_h"]), int(entry["in_w"]),
                          int(entry["in_channels"]), int(entry["out_channels"]),
                          int(entry["kernel_h"]), int(entry["kernel_w"]),
                          int(entry["stride"]), entry["padding"], entry["activation"])
        if kind == "flatten":
            return Flatten()
        if kind == "lstm":
            return Lstm(int(entry["input_dim"]), int(entry["hidden_units"]),
                        int(entry["timesteps"]))
    except KeyError as exc:
        raise FormatError(f"layer entry missing field {exc}") from exc
    raise FormatError(f"unknown layer kind {kind!r}")


def _load_json(data: bytes, name_hint: str) -> Model:
    try:
        doc = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"neither DTNN binary nor JSON: {exc}") from exc
    if not isinstance(doc, dict) or "layers" not in doc:
        raise FormatError("JSON model needs a top-level 'layers' list")
    layers, weights = [], []
    for entry in doc["layers"]:
        spec = _spec_from_json(entry)
        layers.append(spec)
        shapes = _expected_weight_shapes(spec)
        lw = []
        for shape, arr in zip(shapes, entry.get("weights", [])):
            a = np.asarray(arr, dtype=np.float32)
            if a.size != int(np.prod(shape)):
                raise ModelValidationError(
                    f"weight tensor holds {a.size} values, layer needs {int(np.prod(shape))}")
            lw.append(a.reshape(shape))
        if len(lw) != len(shapes):
            raise ModelValidationError("missing weight tensors in JSON layer")
        weights.append(tuple(lw))
    return Model(doc.get("name", name_hint), layers, weights)


def load_model(path) -> Model:
    """Load a DTNN model (binary, or JSON sidecar for hand-written fixtures)."""
    path = Path(path)
    data = path.read_bytes()
    if data[:4] == MAGIC:
        return _load_binary(data, path.stem)
    return _load_json(data, path.stem)


def save_model(model: Model, path) -> None:
    """Write the binary DTNN container (round-trips byte-for-byte)."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HH", VERSION, len(model.layers))
    for spec, lw in zip(model.layers, model.weights):
        out.append(_KIND_TAGS[type(spec)])
        if isinstance(spec, Dense):
            out += struct.pack("<3I", spec.in_units, spec.out_units,
                               _ACT_CODES[spec.activation])
        elif isinstance(spec, Conv2D):
            out += struct.pack("<9I", spec.in_h, spec.in_w, spec.in_channels,
                               spec.out_channels, spec.kernel_h, spec.kernel_w,
                               spec.stride, _PAD_CODES[spec.padding],
                               _ACT_CODES[spec.activation])
        elif isinstance(spec, Lstm):
            out += struct.pack("<3I", spec.input_dim, spec.hidden_units,
                               spec.timesteps)
        for w in lw:
            flat = np.ascontiguousarray(w, dtype="<f4").reshape(-1)
            out += struct.pack("<Q", flat.size)
            out += flat.tobytes()
    Path(path).write_bytes(bytes(out))
