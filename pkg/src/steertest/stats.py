"""Nonparametric statistics: Spearman rank correlation, Mann-Whitney
rank-sum test (tie-corrected normal approximation), and Cohen's d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr, stdtr

from .errors import DegenerateSampleError, InputError

EFFECT_LABELS = ("negligible", "small", "medium", "large")


@dataclass(frozen=True)
class TestOutcome:
    statistic: float
    p_value: float | None = None  # None when the measure carries no p-value
    effect_label: str | None = None


def significance_marker(p_value: float) -> str:
    """Three-star marker for overwhelming significance (p below 2.2e-16)."""
    return "***" if p_value < 2.2e-16 else ""


def average_ranks(values) -> np.ndarray:
    """1-based ranks; tied values share the mean of their ranks."""
    arr = np.asarray(values, dtype=np.float64)
    order = np.argsort(arr, kind="stable")
    ranks = np.empty(len(arr), dtype=np.float64)
    i = 0
    while i < len(arr):
        j = i
        while j + 1 < len(arr) and arr[order[j + 1]] == arr[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(x, y) -> TestOutcome:
    """Rank correlation with a t-distribution p-value."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) != len(y):
        raise InputError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 3:
        raise InputError("spearman needs at least 3 pairs")
    rx = average_ranks(x)
    ry = average_ranks(y)
    rx -= rx.mean()
    ry -= ry.mean()
    denom = math.sqrt(float(rx @ rx) * float(ry @ ry))
    if denom == 0.0:
        raise DegenerateSampleError("zero rank variance")
    rho = float(rx @ ry) / denom
    rho = max(-1.0, min(1.0, rho))
    if abs(rho) == 1.0:
        p = 0.0
    else:
        t = rho * math.sqrt((n - 2) / (1.0 - rho * rho))
        p = 2.0 * (1.0 - float(stdtr(n - 2, abs(t))))
    return TestOutcome(rho, min(max(p, 0.0), 1.0))


def rank_sum_test(a, b) -> TestOutcome:
    """Mann-Whitney U for the first sample, two-sided normal-approximation p."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) == 0 or len(b) == 0:
        raise InputError("both groups must be non-empty")
    na, nb = len(a), len(b)
    n = na + nb
    ranks = average_ranks(np.concatenate([a, b]))
    u = float(ranks[:na].sum()) - na * (na + 1) / 2.0
    if n < 2:
        return TestOutcome(u, 1.0)
    _, counts = np.unique(np.concatenate([a, b]), return_counts=True)
    tie_term = float(((counts ** 3) - counts).sum())
    correction = 1.0 - tie_term / (n ** 3 - n)
    sigma = math.sqrt(na * nb * (n + 1) / 12.0 * correction)
    if sigma == 0.0:
        return TestOutcome(u, 1.0)  # every value tied, no evidence either way
    z = (u - na * nb / 2.0) / sigma
    p = 2.0 * (1.0 - float(ndtr(abs(z))))
    return TestOutcome(u, min(max(p, 0.0), 1.0))


def effect_label(d: float) -> str:
    mag = abs(d)
    if mag < 0.2:
        return "negligible"
    if mag < 0.5:
        return "small"
    if mag < 0.8:
        return "medium"
    return "large"


def cohens_d(a, b) -> TestOutcome:
    """Standardized mean difference with the conventional magnitude label."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if len(a) < 2 or len(b) < 2:
        raise InputError("each group needs at least 2 values")
    na, nb = len(a), len(b)
    pooled_var = (((na - 1) * a.var(ddof=1) + (nb - 1) * b.var(ddof=1))
                  / (na + nb - 2))
    if pooled_var <= 0.0:
        raise DegenerateSampleError("zero pooled variance")
    d = float((a.mean() - b.mean()) / math.sqrt(pooled_var))
    return TestOutcome(d, None, effect_label(d))
