"""Neuron coverage: which neurons an input activates, plus set algebra.

A neuron's scalar is its output for Dense layers, the mean of its feature
map for Conv2D (averaging first, then scaling), and the hidden value at one
unrolled timestep for LSTM (each timestep is its own scaling group, so every
(unit, timestep) pair counts as a separate neuron). Scalars are min-max
scaled within their group and a neuron is activated when the scaled value
exceeds the threshold; a degenerate group (max == min) activates nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .engine import ActivationTrace, Conv2D, Dense, Lstm, Model
from .errors import EmptyModelError, FormatError, ModelMismatchError

DEFAULT_THRESHOLD = 0.2


class NeuronId(NamedTuple):
    layer: int
    unit: int
    timestep: int = -1  # -1 for non-recurrent neurons


@dataclass(frozen=True)
class CoverageMap:
    fingerprint: int
    total: int
    activated: frozenset[NeuronId]

    def __post_init__(self):
        if len(self.activated) > self.total:
            raise ValueError("more activated neurons than the model holds")


def empty_map(model: Model) -> CoverageMap:
    return CoverageMap(model.fingerprint, model.total_neurons, frozenset())


def _scaled(reduction: np.ndarray) -> np.ndarray:
    lo = float(reduction.min())
    hi = float(reduction.max())
    if hi == lo:
        return np.zeros_like(reduction, dtype=np.float64)
    return (reduction.astype(np.float64) - lo) / (hi - lo)


def activated_set(trace: ActivationTrace, threshold: float = DEFAULT_THRESHOLD) -> CoverageMap:
    """Coverage map of one forward pass at the given activation threshold."""
    model = trace.model
    activated = set()
    for li, (spec, out) in enumerate(zip(model.layers, trace.outputs)):
        if isinstance(spec, Dense):
            scaled = _scaled(out)
            for ui in np.nonzero(scaled > threshold)[0]:
                activated.add(NeuronId(li, int(ui)))
        elif isinstance(spec, Conv2D):
            scaled = _scaled(out.mean(axis=(0, 1)))
            for ui in np.nonzero(scaled > threshold)[0]:
                activated.add(NeuronId(li, int(ui)))
        elif isinstance(spec, Lstm):
            for t in range(spec.timesteps):
                scaled = _scaled(out[t])
                for ui in np.nonzero(scaled > threshold)[0]:
                    activated.add(NeuronId(li, int(ui), t))
    return CoverageMap(model.fingerprint, model.total_neurons, frozenset(activated))


def neuron_coverage(cov: CoverageMap) -> float:
    """Activated over total neurons."""
    if cov.total == 0:
        raise EmptyModelError("model has no coverage-countable neurons")
    return len(cov.activated) / cov.total


def _check_same_model(a: CoverageMap, b: CoverageMap):
    if a.fingerprint != b.fingerprint:
        raise ModelMismatchError(
            f"coverage maps from different models: "
            f"{a.fingerprint:#x} vs {b.fingerprint:#x}")


def jaccard_distance(a: CoverageMap, b: CoverageMap) -> float:
    """1 - |intersection| / |union|; 0 when both activation sets are empty."""
    _check_same_model(a, b)
    union = a.activated | b.activated
    if not union:
        return 0.0
    return 1.0 - len(a.activated & b.activated) / len(union)


def merge(a: CoverageMap, b: CoverageMap) -> CoverageMap:
    _check_same_model(a, b)
    if a.total != b.total:
        raise ModelMismatchError("coverage maps disagree on total neurons")
    return CoverageMap(a.fingerprint, a.total, a.activated | b.activated)


def to_json(cov: CoverageMap) -> str:
    ids = [[n.layer, n.unit, None if n.timestep < 0 else n.timestep]
           for n in sorted(cov.activated)]
    return json.dumps({"fingerprint": cov.fingerprint, "total": cov.total,
                       "activated": ids}, separators=(",", ":"))


def from_json(text: str) -> CoverageMap:
    try:
        doc = json.loads(text)
        ids = frozenset(NeuronId(int(l), int(u), -1 if t is None else int(t))
                        for l, u, t in doc["activated"])
        return CoverageMap(int(doc["fingerprint"]), int(doc["total"]), ids)
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"bad coverage map JSON: {exc}") from exc
