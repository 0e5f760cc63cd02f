"""Deterministic synthetic fixtures: models, frames, and demo datasets.

Pretrained competition models are out of scope, so tests and the CLI demo
run against small seeded models. All weights and pixels flow from the
splitmix64 stream, so a (kind, seed) pair pins a model bit-for-bit.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .engine import Conv2D, Dense, Flatten, Lstm, Model, forward
from .image_io import to_model_input, write_image
from .rng import SplitMix64

MODEL_KINDS = ("cnn", "lstm", "dense", "zero")


def _uniform_array(stream: SplitMix64, shape, scale: float) -> np.ndarray:
    flat = np.array([stream.uniform(-scale, scale) for _ in range(int(np.prod(shape)))],
                    dtype=np.float32)
    return flat.reshape(shape)


def _glorot(stream: SplitMix64, shape, fan_in: int, fan_out: int) -> np.ndarray:
    return _uniform_array(stream, shape, float(np.sqrt(6.0 / (fan_in + fan_out))))


def _dense_weights(stream, spec: Dense):
    w = _glorot(stream, (spec.in_units, spec.out_units), spec.in_units, spec.out_units)
    b = _uniform_array(stream, (spec.out_units,), 0.05)
    return (w, b)


def _conv_weights(stream, spec: Conv2D):
    fan_in = spec.in_channels * spec.kernel_h * spec.kernel_w
    fan_out = spec.out_channels * spec.kernel_h * spec.kernel_w
    k = _glorot(stream, (spec.out_channels, spec.in_channels, spec.kernel_h,
                         spec.kernel_w), fan_in, fan_out)
    b = _uniform_array(stream, (spec.out_channels,), 0.05)
    return (k, b)


def _lstm_weights(stream, spec: Lstm):
    h4 = 4 * spec.hidden_units
    w = _glorot(stream, (spec.input_dim, h4), spec.input_dim, h4)
    u = _glorot(stream, (spec.hidden_units, h4), spec.hidden_units, h4)
    b = _uniform_array(stream, (h4,), 0.05)
    return (w, u, b)


def _fill_weights(stream: SplitMix64, layers):
    weights = []
    for spec in layers:
        if isinstance(spec, Dense):
            weights.append(_dense_weights(stream, spec))
        elif isinstance(spec, Conv2D):
            weights.append(_conv_weights(stream, spec))
        elif isinstance(spec, Lstm):
            weights.append(_lstm_weights(stream, spec))
        else:
            weights.append(())
    return weights


def make_model(kind: str = "cnn", seed: int = 0, image_hw: tuple[int, int] = (16, 16),
               channels: int = 3) -> Model:
    """Build a small seeded steering model over (H, W, channels) images."""
    h, w = image_hw
    stream = SplitMix64(seed ^ 0x5EED)
    if kind == "cnn":
        c1 = Conv2D(h, w, channels, 4, 3, 3, 2, "same", "relu")
        h1, w1 = -(-h // 2), -(-w // 2)
        c2 = Conv2D(h1, w1, 4, 6, 3, 3, 2, "valid", "tanh")
        h2 = (h1 - 3) // 2 + 1
        w2 = (w1 - 3) // 2 + 1
        flat = h2 * w2 * 6
        layers = [c1, c2, Flatten(),
                  Dense(flat, 16, "tanh"), Dense(16, 8, "tanh"), Dense(8, 1, "tanh")]
    elif kind == "lstm":
        size = h * w * channels
        timesteps = 4
        if size % timesteps:
            raise ValueError("image size must divide into 4 timesteps")
        layers = [Conv2D(h, w, channels, 2, 3, 3, 2, "same", "tanh"),
                  Flatten()]
        flat = (-(-h // 2)) * (-(-w // 2)) * 2
        if flat % timesteps:
            raise ValueError("flattened feature size must divide into 4 timesteps")
        layers += [Lstm(flat // timesteps, 8, timesteps), Dense(8, 1, "tanh")]
    elif kind == "dense":
        size = h * w * channels
        layers = [Conv2D(h, w, channels, 3, 3, 3, 2, "same", "relu"), Flatten(),
                  Dense((-(-h // 2)) * (-(-w // 2)) * 3, 10, "relu"),
                  Dense(10, 1, "tanh")]
    elif kind == "zero":
        # every layer outputs a constant, so nothing ever activates
        layers = [Conv2D(h, w, channels, 3, 3, 3, 2, "same", "relu"), Flatten(),
                  Dense((-(-h // 2)) * (-(-w // 2)) * 3, 6, "tanh"), Dense(6, 1, "tanh")]
        weights = [tuple(np.zeros_like(t) for t in lw)
                   for lw in _fill_weights(stream, layers)]
        return Model(f"zero-{seed}", layers, weights)
    else:
        raise ValueError(f"unknown synthetic model kind {kind!r}")
    return Model(f"{kind}-{seed}", layers, _fill_weights(stream, layers))


def make_frame(height: int, width: int, channels: int, stream: SplitMix64) -> np.ndarray:
    """One synthetic road-like frame: sky/ground gradient plus seeded blobs."""
    ys = np.linspace(0.0, 1.0, height)[:, None, None]
    base = 60.0 + 120.0 * ys
    img = np.repeat(np.repeat(base, width, axis=1), channels, axis=2)
    for _ in range(6):
        cy = stream.randint(height)
        cx = stream.randint(width)
        radius = 2 + stream.randint(max(min(height, width) // 3, 1))
        level = stream.uniform(-80.0, 80.0)
        yy, xx = np.mgrid[0:height, 0:width]
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 <= radius * radius
        img[mask] += level
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def make_dataset(out_dir, n_frames: int = 12, image_hw: tuple[int, int] = (16, 16),
                 channels: int = 3, seed: int = 0, model: Model | None = None,
                 label_noise: float = 0.05) -> Path:
    """Write a labels.csv + PPM/PGM dataset directory.

    When a model is given, labels are its own predictions plus seeded noise
    (clamped to +/- 25 degrees), which keeps the baseline MSE small the way
    a trained model's would be. Otherwise labels are seeded uniform angles.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stream = SplitMix64(seed ^ 0xDA7A)
    h, w = image_hw
    rows = []
    for i in range(n_frames):
        frame_id = f"frame{i:04d}"
        img = make_frame(h, w, channels, stream)
        ext = "ppm" if channels == 3 else "pgm"
        write_image(out_dir / f"{frame_id}.{ext}", img)
        if model is not None:
            pred, _ = forward(model, to_model_input(img))
            angle = pred * 25.0 + stream.uniform(-label_noise, label_noise) * 25.0
        else:
            angle = stream.uniform(-20.0, 20.0)
        angle = max(-25.0, min(25.0, angle))
        rows.append((frame_id, angle))
    with open(out_dir / "labels.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id", "angle_deg"])
        for frame_id, angle in rows:
            writer.writerow([frame_id, repr(angle)])
    return out_dir
