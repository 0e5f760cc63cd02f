"""Metamorphic test oracle for steering predictions.

The relation: a transformed image's prediction error against the original
label must stay within lambda times the baseline mean squared error of the
untouched set. Items over that threshold become violation records. A
separate epsilon gate restricts which simple transformation/parameter pairs
may contribute violations at all (composite rain/fog/guided bypass it).
Boundary cases use <= in both inequalities: exact equality is no violation
and passes the gate.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import InputError
from .transforms import TransformSpec, spec_from_json, spec_to_json

DEFAULT_LAMBDA = 5.0
DEFAULT_EPSILON = 0.03


@dataclass(frozen=True)
class OracleConfig:
    relaxation: float = DEFAULT_LAMBDA  # lambda in the relation
    closeness: float = DEFAULT_EPSILON  # epsilon in the filtration gate

    def __post_init__(self):
        if self.relaxation < 0 or self.closeness < 0:
            raise InputError("lambda and epsilon must be >= 0")


@dataclass(frozen=True)
class LabeledSet:
    """Original frames with manual labels and the model's baseline predictions."""
    ids: tuple[str, ...]
    labels: tuple[float, ...]       # manual label per item
    predictions: tuple[float, ...]  # model output on the untouched item

    def __post_init__(self):
        if not self.ids:
            raise InputError("labeled set must be non-empty")
        if not (len(self.ids) == len(self.labels) == len(self.predictions)):
            raise InputError("ids, labels and predictions must align")
        for v in self.labels + self.predictions:
            if not -1.0 <= v <= 1.0:
                raise InputError(f"scaled steering value {v} outside [-1, 1]")

    @property
    def baseline_mse(self) -> float:
        return mse(list(self.predictions), list(self.labels))


@dataclass(frozen=True)
class ViolationRecord:
    image_id: str
    model: str
    provenance: tuple[TransformSpec, ...]
    label: float            # manual label
    original_pred: float    # prediction on the untouched image
    transformed_pred: float
    squared_error: float    # (label - transformed_pred)^2
    threshold: float        # lambda * baseline MSE

    @property
    def category(self) -> str:
        return violation_category(self.provenance)


def violation_category(provenance) -> str:
    """Table row the violation belongs to: a simple kind, rain, fog, or guided."""
    if len(provenance) != 1:
        return "guided"
    return provenance[0].kind


def mse(predictions, labels) -> float:
    """Mean squared error between aligned prediction/label lists."""
    if len(predictions) != len(labels):
        raise InputError(f"length mismatch: {len(predictions)} vs {len(labels)}")
    if not predictions:
        raise InputError("mse of an empty set")
    return sum((p - l) ** 2 for p, l in zip(predictions, labels)) / len(predictions)


def check_metamorphic(baseline: LabeledSet, transformed_preds, relaxation: float,
                      provenance=None, model: str = "") -> list[ViolationRecord]:
    """Violations of the relaxed relation for one transformed prediction set.

    transformed_preds aligns one-to-one with the baseline items; provenance
    is either one TransformSpec chain applied to every item or a per-item
    list of chains.
    """
    transformed_preds = list(transformed_preds)
    if len(transformed_preds) != len(baseline.ids):
        raise InputError("transformed predictions misaligned with baseline")
    if provenance is None:
        chains = [()] * len(baseline.ids)
    elif provenance and isinstance(provenance[0], TransformSpec):
        chains = [tuple(provenance)] * len(baseline.ids)
    else:
        chains = [tuple(c) for c in provenance]
        if len(chains) != len(baseline.ids):
            raise InputError("provenance misaligned with baseline")
    threshold = relaxation * baseline.baseline_mse
    violations = []
    for item_id, label, orig, trans, chain in zip(
            baseline.ids, baseline.labels, baseline.predictions,
            transformed_preds, chains):
        err = (label - trans) ** 2
        if err > threshold:
            violations.append(ViolationRecord(item_id, model, chain, label, orig,
                                              trans, err, threshold))
    return violations


def filter_transform(mse_trans: float, mse_orig: float, closeness: float) -> bool:
    """Gate for simple transformations: synthetic MSE close to the original."""
    return abs(mse_trans - mse_orig) <= closeness


def count_errors(violations) -> dict[tuple[str, str], int]:
    """Unique erroneous behaviors per (category, model), deduped by image id."""
    seen: dict[tuple[str, str], set] = {}
    for v in violations:
        key = (v.category, v.model)
        seen.setdefault(key, set()).add(v.image_id)
    return {key: len(ids) for key, ids in seen.items()}


def violation_to_json(v: ViolationRecord) -> str:
    return json.dumps({
        "image_id": v.image_id,
        "model": v.model,
        "category": v.category,
        "provenance": [spec_to_json(s) for s in v.provenance],
        "label": v.label,
        "original_pred": v.original_pred,
        "transformed_pred": v.transformed_pred,
        "squared_error": v.squared_error,
        "threshold": v.threshold,
    }, sort_keys=True, separators=(",", ":"))


def violation_from_json(line: str) -> ViolationRecord:
    doc = json.loads(line)
    return ViolationRecord(
        doc["image_id"], doc["model"],
        tuple(spec_from_json(s) for s in doc["provenance"]),
        doc["label"], doc["original_pred"], doc["transformed_pred"],
        doc["squared_error"], doc["threshold"])
