"""Minimal float32 inference engine with full activation recording.

Layer kinds: Dense, Conv2D, Flatten, LSTM. The forward pass returns the
scalar steering prediction together with an ActivationTrace holding every
layer's post-activation outputs (all unrolled timesteps for LSTM), which is
what the coverage module consumes.

Conventions fixed here and in the file format:
  - all tensors are float32, row-major;
  - Dense computes x @ W + b with W of shape (in_units, out_units);
  - Conv2D kernels have shape (out_channels, in_channels, kh, kw); images
    are channel-last (H, W, C); "same" padding zero-pads, split
    floor-left / ceil-right;
  - LSTM weight matrices pack the four gates as column blocks in the order
    [input, forget, candidate, output].

Models are immutable after construction and safe to share across threads;
forward allocates all per-call state, so concurrent calls are safe.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ModelValidationError, ShapeError

ACTIVATIONS = ("relu", "tanh", "sigmoid", "linear")


def apply_activation(x: np.ndarray, activation: str) -> np.ndarray:
    if activation == "relu":
        return np.maximum(x, np.float32(0.0))
    if activation == "tanh":
        return np.tanh(x)
    if activation == "sigmoid":
        return np.float32(1.0) / (np.float32(1.0) + np.exp(-x))
    if activation == "linear":
        return x
    raise ModelValidationError(f"unknown activation {activation!r}")


@dataclass(frozen=True)
class Dense:
    in_units: int
    out_units: int
    activation: str


@dataclass(frozen=True)
class Conv2D:
    in_h: int
    in_w: int
    in_channels: int
    out_channels: int
    kernel_h: int
    kernel_w: int
    stride: int
    padding: str  # "valid" | "same"
    activation: str


@dataclass(frozen=True)
class Flatten:
    pass


@dataclass(frozen=True)
class Lstm:
    input_dim: int
    hidden_units: int
    timesteps: int


LayerSpec = Dense | Conv2D | Flatten | Lstm


def conv_output_hw(spec: Conv2D) -> tuple[int, int]:
    if spec.padding == "valid":
        oh = (spec.in_h - spec.kernel_h) // spec.stride + 1
        ow = (spec.in_w - spec.kernel_w) // spec.stride + 1
    else:  # same
        oh = -(-spec.in_h // spec.stride)
        ow = -(-spec.in_w // spec.stride)
    return oh, ow


def layer_output_shape(spec: LayerSpec, in_shape: tuple[int, ...]) -> tuple[int, ...]:
    """Output shape of one layer, validating the input shape against it."""
    size = int(np.prod(in_shape))
    if isinstance(spec, Dense):
        if in_shape != (spec.in_units,):
            raise ModelValidationError(
                f"Dense expects ({spec.in_units},), previous layer gives {in_shape}")
        return (spec.out_units,)
    if isinstance(spec, Conv2D):
        if in_shape != (spec.in_h, spec.in_w, spec.in_channels):
            raise ModelValidationError(
                f"Conv2D expects {(spec.in_h, spec.in_w, spec.in_channels)}, "
                f"previous layer gives {in_shape}")
        oh, ow = conv_output_hw(spec)
        if oh < 1 or ow < 1:
            raise ModelValidationError("kernel larger than padded input")
        return (oh, ow, spec.out_channels)
    if isinstance(spec, Flatten):
        return (size,)
    if isinstance(spec, Lstm):
        want = spec.timesteps * spec.input_dim
        if size != want or len(in_shape) > 2:
            raise ModelValidationError(
                f"LSTM expects {spec.timesteps}x{spec.input_dim}={want} values, "
                f"previous layer gives {in_shape}")
        # downstream layers see the final hidden state
        return (spec.hidden_units,)
    raise ModelValidationError(f"unknown layer spec {spec!r}")


def layer_neuron_count(spec: LayerSpec) -> int:
    """Coverage-countable neurons in a layer (Flatten contributes none)."""
    if isinstance(spec, Dense):
        return spec.out_units
    if isinstance(spec, Conv2D):
        return spec.out_channels
    if isinstance(spec, Lstm):
        return spec.hidden_units * spec.timesteps
    return 0


def _expected_weight_shapes(spec: LayerSpec) -> tuple[tuple[int, ...], ...]:
    if isinstance(spec, Dense):
        return ((spec.in_units, spec.out_units), (spec.out_units,))
    if isinstance(spec, Conv2D):
        return ((spec.out_channels, spec.in_channels, spec.kernel_h, spec.kernel_w),
                (spec.out_channels,))
    if isinstance(spec, Lstm):
        h4 = 4 * spec.hidden_units
        return ((spec.input_dim, h4), (spec.hidden_units, h4), (h4,))
    return ()


def _layer_descriptor(spec: LayerSpec) -> str:
    if isinstance(spec, Dense):
        return f"Dense({spec.in_units}->{spec.out_units},{spec.activation})"
    if isinstance(spec, Conv2D):
        return (f"Conv2D({spec.in_h}x{spec.in_w}x{spec.in_channels}->"
                f"{spec.out_channels},k{spec.kernel_h}x{spec.kernel_w},"
                f"s{spec.stride},{spec.padding},{spec.activation})")
    if isinstance(spec, Lstm):
        return f"LSTM({spec.input_dim},h{spec.hidden_units},t{spec.timesteps})"
    return "Flatten"


class Model:
    """Immutable validated layer stack plus weights."""

    def __init__(self, name: str, layers, weights):
        self.name = name
        self.layers = tuple(layers)
        self.weights = tuple(tuple(np.asarray(w, dtype=np.float32).copy() for w in lw)
                             for lw in weights)
        for lw in self.weights:
            for w in lw:
                w.setflags(write=False)
        self._validate()
        self.input_shape = self._infer_input_shape()
        self.output_shapes = self._chain_shapes()
        self.fingerprint = self._fingerprint()

    def _validate(self):
        if not self.layers:
            raise ModelValidationError("model has no layers")
        if len(self.weights) != len(self.layers):
            raise ModelValidationError("one weight tuple required per layer")
        if isinstance(self.layers[0], Flatten):
            raise ModelValidationError("first layer must define the input shape")
        for i, (spec, lw) in enumerate(zip(self.layers, self.weights)):
            if isinstance(spec, Dense) and (spec.in_units < 1 or spec.out_units < 1):
                raise ModelValidationError(f"layer {i}: Dense units must be >= 1")
            if isinstance(spec, Lstm) and spec.timesteps < 1:
                raise ModelValidationError(f"layer {i}: LSTM timesteps must be >= 1")
            if isinstance(spec, Conv2D):
                if spec.stride < 1 or spec.kernel_h < 1 or spec.kernel_w < 1:
                    raise ModelValidationError(f"layer {i}: bad Conv2D geometry")
                if spec.padding not in ("valid", "same"):
                    raise ModelValidationError(f"layer {i}: bad padding {spec.padding!r}")
            if isinstance(spec, (Dense, Conv2D)) and spec.activation not in ACTIVATIONS:
                raise ModelValidationError(f"layer {i}: bad activation {spec.activation!r}")
            expect = _expected_weight_shapes(spec)
            got = tuple(w.shape for w in lw)
            if got != expect:
                raise ModelValidationError(
                    f"layer {i}: weight shapes {got} do not match {expect}")
            for w in lw:
                if not np.all(np.isfinite(w)):
                    raise ModelValidationError(f"layer {i}: non-finite weight")

    def _infer_input_shape(self) -> tuple[int, ...]:
        first = self.layers[0]
        if isinstance(first, Dense):
            return (first.in_units,)
        if isinstance(first, Conv2D):
            return (first.in_h, first.in_w, first.in_channels)
        if isinstance(first, Lstm):
            return (first.timesteps, first.input_dim)
        raise ModelValidationError("first layer must define the input shape")

    def _chain_shapes(self) -> tuple[tuple[int, ...], ...]:
        shape = self._infer_input_shape()
        shapes = []
        for spec in self.layers:
            shape = layer_output_shape(spec, shape)
            shapes.append(shape)
        if int(np.prod(shapes[-1])) != 1:
            raise ModelValidationError(
                f"final layer must output one scalar, got shape {shapes[-1]}")
        return tuple(shapes)

    def _fingerprint(self) -> int:
        desc = ";".join(_layer_descriptor(s) for s in self.layers)
        digest = hashlib.blake2b(desc.encode("ascii"), digest_size=8).digest()
        return int.from_bytes(digest, "little")

    @property
    def total_neurons(self) -> int:
        return sum(layer_neuron_count(s) for s in self.layers)


@dataclass(frozen=True)
class ActivationTrace:
    """Post-activation outputs of every layer for one input."""
    model: Model
    outputs: tuple[np.ndarray, ...]  # LSTM entries have shape (timesteps, hidden)


def dense_forward(x: np.ndarray, w: np.ndarray, b: np.ndarray, activation: str) -> np.ndarray:
    return apply_activation(x @ w + b, activation)


def _pad_same(x: np.ndarray, spec: Conv2D, oh: int, ow: int) -> np.ndarray:
    pad_h = max((oh - 1) * spec.stride + spec.kernel_h - spec.in_h, 0)
    pad_w = max((ow - 1) * spec.stride + spec.kernel_w - spec.in_w, 0)
    top, left = pad_h // 2, pad_w // 2
    return np.pad(x, ((top, pad_h - top), (left, pad_w - left), (0, 0)))


def conv2d(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray,
           stride: int = 1, padding: str = "valid",
           activation: str = "linear") -> np.ndarray:
    """2-D convolution over a channel-last image, one kernel per out channel."""
    x = np.asarray(x, dtype=np.float32)
    kernels = np.asarray(kernels, dtype=np.float32)
    if x.ndim != 3 or kernels.ndim != 4 or kernels.shape[1] != x.shape[2]:
        raise ShapeError(
            f"conv2d needs (H,W,Cin) input and (Cout,Cin,kh,kw) kernels, "
            f"got {x.shape} and {kernels.shape}")
    spec = Conv2D(x.shape[0], x.shape[1], x.shape[2], kernels.shape[0],
                  kernels.shape[2], kernels.shape[3], stride, padding, activation)
    oh, ow = conv_output_hw(spec)
    if oh < 1 or ow < 1:
        raise ShapeError("kernel larger than padded input")
    if padding == "same":
        x = _pad_same(x, spec, oh, ow)
    out = np.zeros((oh, ow, spec.out_channels), dtype=np.float32)
    bias = np.asarray(bias, dtype=np.float32)
    hi = oh * stride
    wi = ow * stride
    for dy in range(spec.kernel_h):
        for dx in range(spec.kernel_w):
            window = x[dy:dy + hi:stride, dx:dx + wi:stride, :]
            # (oh, ow, Cin) x (Cout, Cin) summed over Cin
            out += window @ kernels[:, :, dy, dx].T
    out += bias
    return apply_activation(out, activation)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return np.float32(1.0) / (np.float32(1.0) + np.exp(-x))


def lstm_forward(spec: Lstm, weights, inputs: np.ndarray) -> np.ndarray:
    """Unrolled LSTM; returns the hidden state at every timestep, (T, H)."""
    w, u, b = (np.asarray(a, dtype=np.float32) for a in weights)
    inputs = np.asarray(inputs, dtype=np.float32)
    if inputs.shape != (spec.timesteps, spec.input_dim):
        raise ShapeError(
            f"LSTM expects {(spec.timesteps, spec.input_dim)} input, got {inputs.shape}")
    h = np.zeros(spec.hidden_units, dtype=np.float32)
    c = np.zeros(spec.hidden_units, dtype=np.float32)
    nh = spec.hidden_units
    outputs = np.zeros((spec.timesteps, nh), dtype=np.float32)
    for t in range(spec.timesteps):
        z = inputs[t] @ w + h @ u + b
        i = _sigmoid(z[0:nh])
        f = _sigmoid(z[nh:2 * nh])
        g = np.tanh(z[2 * nh:3 * nh])
        o = _sigmoid(z[3 * nh:4 * nh])
        c = f * c + i * g
        h = o * np.tanh(c)
        outputs[t] = h
    return outputs


def forward(model: Model, x: np.ndarray) -> tuple[float, ActivationTrace]:
    """Run one input through the model, recording every layer's outputs."""
    x = np.asarray(x, dtype=np.float32)
    if x.shape != model.input_shape:
        raise ShapeError(f"input shape {x.shape} != model input {model.input_shape}")
    outputs = []
    value = x
    for spec, lw in zip(model.layers, model.weights):
        if isinstance(spec, Dense):
            value = dense_forward(value, lw[0], lw[1], spec.activation)
        elif isinstance(spec, Conv2D):
            value = conv2d(value, lw[0], lw[1], spec.stride, spec.padding,
                           spec.activation)
        elif isinstance(spec, Flatten):
            value = value.reshape(-1)
        else:  # Lstm
            seq = value.reshape(spec.timesteps, spec.input_dim)
            unrolled = lstm_forward(spec, lw, seq)
            outputs.append(unrolled)
            value = unrolled[-1]
            continue
        outputs.append(value)
    prediction = float(value.reshape(-1)[0])
    return prediction, ActivationTrace(model=model, outputs=tuple(outputs))
