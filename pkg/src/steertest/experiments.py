"""Experiment drivers: coverage correlation, transformation study, guided
search comparison, and the metamorphic-oracle sweep.

Each driver takes (model, dataset, cfg) and returns a plain-dict report
section; everything is deterministic given the RunConfig (including
rng_seed), so identical configs reproduce identical sections.
"""

from __future__ import annotations

import numpy as np

from .config import RunConfig
from .coverage import (activated_set, empty_map, jaccard_distance, merge,
                       neuron_coverage)
from .dataset import Dataset
from .engine import Model, forward
from .errors import DegenerateSampleError, InputError
from .image_io import to_model_input
from .oracle import (LabeledSet, ViolationRecord, check_metamorphic,
                     count_errors, filter_transform, mse)
from .rng import hash64
from .search import SearchConfig, guided_search
from .stats import cohens_d, rank_sum_test, significance_marker, spearman
from .transforms import COMPOSITE_KINDS, TransformSpec, apply, unique_params

SWEEP_LAMBDAS = tuple(range(1, 11))
SWEEP_EPSILONS = (0.01, 0.02, 0.03, 0.04, 0.05)


def _seed_frames(dataset: Dataset, cfg: RunConfig):
    frames = dataset.frames[:cfg.max_seeds]
    return [(f.frame_id, f.load(), f.label) for f in frames]


def _frame_pass(model: Model, img, threshold: float):
    pred, trace = forward(model, to_model_input(img))
    return pred, activated_set(trace, threshold)


def _study_grids(cfg: RunConfig):
    """Per-kind parameter grids: duplicates dropped, per-kind ceiling applied."""
    grids = {}
    for kind in cfg.kinds:
        if kind in COMPOSITE_KINDS:
            continue
        grids[kind] = unique_params(cfg.param_table[kind], cfg.max_params)
    return grids


def run_coverage_correlation(model: Model, dataset: Dataset, cfg: RunConfig) -> dict:
    """Per-frame coverage vs steering output, plus the direction-group test."""
    seeds = _seed_frames(dataset, cfg)
    if len(seeds) < 3:
        raise InputError("coverage correlation needs at least 3 frames")
    rows = []
    for frame_id, img, label in seeds:
        pred, cov = _frame_pass(model, img, cfg.threshold)
        rows.append({"frame_id": frame_id, "coverage": neuron_coverage(cov),
                     "prediction": pred, "label": label})
    coverages = [r["coverage"] for r in rows]
    predictions = [r["prediction"] for r in rows]

    section = {"status": "ok", "frames": rows, "sign_convention": "positive = left"}
    try:
        outcome = spearman(coverages, predictions)
        section["spearman"] = {"statistic": outcome.statistic,
                               "p_value": outcome.p_value,
                               "marker": significance_marker(outcome.p_value)}
    except DegenerateSampleError as exc:
        section["status"] = "inconclusive"
        section["spearman"] = {"status": "inconclusive", "reason": str(exc)}

    left = [c for c, p in zip(coverages, predictions) if p > 0]
    right = [c for c, p in zip(coverages, predictions) if p < 0]
    if not left or not right:
        section["direction"] = {"status": "skipped", "reason": "single group"}
        return section
    direction = {"status": "ok", "left_n": len(left), "right_n": len(right)}
    try:
        ranksum = rank_sum_test(left, right)
        direction["u_statistic"] = ranksum.statistic
        direction["p_value"] = ranksum.p_value
        direction["marker"] = significance_marker(ranksum.p_value)
        if len(left) >= 2 and len(right) >= 2:
            effect = cohens_d(left, right)
            direction["cohens_d"] = effect.statistic
            direction["effect"] = effect.effect_label
    except DegenerateSampleError as exc:
        direction["status"] = "inconclusive"
        direction["reason"] = str(exc)
        section["status"] = "inconclusive"
    section["direction"] = direction
    return section


def _single_transform_maps(model: Model, seeds, cfg: RunConfig):
    """Per-seed baseline map and per-(seed, kind) union map over the grid."""
    grids = _study_grids(cfg)
    baselines = {}
    kind_maps = {}
    for frame_id, img, _ in seeds:
        _, base = _frame_pass(model, img, cfg.threshold)
        baselines[frame_id] = base
        for kind, grid in grids.items():
            acc = empty_map(model)
            for params in grid:
                variant = apply(img, TransformSpec(kind, params))
                _, cov = _frame_pass(model, variant, cfg.threshold)
                acc = merge(acc, cov)
            kind_maps[(frame_id, kind)] = acc
    return grids, baselines, kind_maps


def run_transform_study(model: Model, dataset: Dataset, cfg: RunConfig) -> dict:
    """Jaccard matrix, cumulative coverage curve, and per-kind increase."""
    seeds = _seed_frames(dataset, cfg)
    if not seeds:
        raise InputError("transform study needs at least one seed frame")
    grids, baselines, kind_maps = _single_transform_maps(model, seeds, cfg)
    kinds = list(grids.keys())
    ids = [frame_id for frame_id, _, _ in seeds]

    # pairwise Jaccard between per-kind activated sets, median across seeds
    matrix = []
    for ka in kinds:
        row = []
        for kb in kinds:
            cells = [jaccard_distance(kind_maps[(i, ka)], kind_maps[(i, kb)])
                     for i in ids]
            row.append(float(np.median(cells)))
        matrix.append(row)

    # cumulative union in the listed kind order (counts and ratios)
    per_seed_counts = {}
    for i in ids:
        acc = empty_map(model)
        counts = []
        for kind in kinds:
            acc = merge(acc, kind_maps[(i, kind)])
            counts.append(len(acc.activated))
        per_seed_counts[i] = counts
    mean_counts = [float(np.mean([per_seed_counts[i][k] for i in ids]))
                   for k in range(len(kinds))]
    mean_ratios = [c / model.total_neurons for c in mean_counts]

    # coverage increase per kind vs the untouched seed
    increase = {}
    for kind in kinds:
        pcts = []
        rows = []
        for i in ids:
            n_o = len(baselines[i].activated)
            n_t = len(kind_maps[(i, kind)].activated)
            pct = (n_t - n_o) / n_o if n_o else None
            rows.append({"frame_id": i, "baseline": n_o, "transformed": n_t,
                         "pct": pct})
            if pct is not None:
                pcts.append(pct)
        increase[kind] = {"median_pct": float(np.median(pcts)) if pcts else None,
                          "per_seed": rows}

    return {
        "kinds": kinds,
        "params_per_kind": {k: len(g) for k, g in grids.items()},
        "seed_count": len(ids),
        "generated_per_seed": sum(len(g) for g in grids.values()),
        "jaccard_median": {"kinds": kinds, "matrix": matrix},
        "cumulative": {"kinds": kinds, "mean_counts": mean_counts,
                       "mean_ratios": mean_ratios,
                       "per_seed_counts": per_seed_counts},
        "increase": increase,
        "total_neurons": model.total_neurons,
    }


def run_guided(model: Model, dataset: Dataset, cfg: RunConfig) -> dict:
    """Baseline vs cumulative single-transform vs guided-search coverage."""
    seeds = _seed_frames(dataset, cfg)
    if not seeds:
        raise InputError("guided comparison needs at least one seed frame")
    _, baselines, kind_maps = _single_transform_maps(model, seeds, cfg)
    baseline = empty_map(model)
    for cov in baselines.values():
        baseline = merge(baseline, cov)
    cumulative = baseline
    for cov in kind_maps.values():
        cumulative = merge(cumulative, cov)

    result = guided_search(
        model, [img for _, img, _ in seeds],
        SearchConfig(transformations=cfg.kinds, max_failed_tries=cfg.max_failed_tries,
                     rng_seed=cfg.rng_seed, threshold=cfg.threshold,
                     param_table=cfg.param_table),
        seed_ids=[frame_id for frame_id, _, _ in seeds])
    guided = result.final_coverage

    n_base = len(baseline.activated)
    n_cum = len(cumulative.activated)
    n_guided = len(guided.activated)
    return {
        "seed_count": len(seeds),
        "total_neurons": model.total_neurons,
        "baseline_covered": n_base,
        "cumulative_covered": n_cum,
        "guided_covered": n_guided,
        "baseline_ratio": neuron_coverage(baseline),
        "cumulative_ratio": neuron_coverage(cumulative),
        "guided_ratio": neuron_coverage(guided),
        "pct_increase_vs_baseline": (n_guided - n_base) / n_base if n_base else None,
        "pct_increase_vs_cumulative": (n_guided - n_cum) / n_cum if n_cum else None,
        "generated_count": len(result.generated),
        "accepted_count": len(result.generated),
        "attempt_count": len(result.attempts),
    }


def composite_specs(cfg: RunConfig, kind: str) -> list[TransformSpec]:
    """Rain/fog specs with deterministic per-parameter effect seeds."""
    tag = 1 if kind == "fog" else 2
    specs = []
    for i, params in enumerate(cfg.param_table[kind]):
        seed = hash64(cfg.rng_seed, tag, i)
        specs.append(TransformSpec(kind, (seed,) + tuple(params)))
    return specs


def run_oracle(model: Model, dataset: Dataset, cfg: RunConfig) -> tuple[dict, list]:
    """Lambda x epsilon sweep plus the violation records at the configured cell."""
    seeds = _seed_frames(dataset, cfg)
    if not seeds:
        raise InputError("oracle run needs at least one frame")
    ids = [frame_id for frame_id, _, _ in seeds]
    labels = [label for _, _, label in seeds]
    originals = {frame_id: img for frame_id, img, _ in seeds}
    base_preds = [forward(model, to_model_input(img))[0] for _, img, _ in seeds]
    baseline = LabeledSet(tuple(ids), tuple(labels), tuple(base_preds))
    mse_orig = baseline.baseline_mse

    # simple transformations: prediction set per (kind, param)
    grids = _study_grids(cfg)
    simple_runs = []  # (spec, mse_trans, preds)
    for kind, grid in grids.items():
        for params in grid:
            spec = TransformSpec(kind, params)
            preds = [forward(model, to_model_input(apply(img, spec)))[0]
                     for _, img, _ in seeds]
            simple_runs.append((spec, mse(preds, labels), preds))

    composite_runs = {}
    for kind in ("fog", "rain"):
        runs = []
        for spec in composite_specs(cfg, kind):
            preds = [forward(model, to_model_input(apply(img, spec)))[0]
                     for _, img, _ in seeds]
            runs.append((spec, mse(preds, labels), preds))
        composite_runs[kind] = runs

    search_result = guided_search(
        model, [img for _, img, _ in seeds],
        SearchConfig(transformations=cfg.kinds, max_failed_tries=cfg.max_failed_tries,
                     rng_seed=cfg.rng_seed, threshold=cfg.threshold,
                     param_table=cfg.param_table),
        seed_ids=ids)
    label_by_id = dict(zip(ids, labels))
    pred_by_id = dict(zip(ids, base_preds))
    guided_items = []  # (seed_id, chain, theta_t)
    for gen in search_result.generated:
        theta_t = forward(model, to_model_input(gen.image))[0]
        guided_items.append((gen.seed_id, gen.chain, theta_t))

    def simple_count(lam: float, eps: float) -> int:
        total = 0
        for spec, mse_trans, preds in simple_runs:
            if not filter_transform(mse_trans, mse_orig, eps):
                continue
            total += len(check_metamorphic(baseline, preds, lam,
                                           provenance=(spec,), model=model.name))
        return total

    def composite_count(kind: str, lam: float) -> int:
        return sum(len(check_metamorphic(baseline, preds, lam, provenance=(spec,),
                                         model=model.name))
                   for spec, _, preds in composite_runs[kind])

    def guided_count(lam: float) -> int:
        threshold = lam * mse_orig
        return sum(1 for seed_id, _, theta_t in guided_items
                   if (label_by_id[seed_id] - theta_t) ** 2 > threshold)

    sweep = {
        "lambdas": list(SWEEP_LAMBDAS),
        "epsilons": list(SWEEP_EPSILONS),
        "simple": [[simple_count(lam, eps) for eps in SWEEP_EPSILONS]
                   for lam in SWEEP_LAMBDAS],
        "fog": [composite_count("fog", lam) for lam in SWEEP_LAMBDAS],
        "rain": [composite_count("rain", lam) for lam in SWEEP_LAMBDAS],
        "guided": [guided_count(lam) for lam in SWEEP_LAMBDAS],
    }

    # violation records at the configured (lambda, epsilon) cell
    violations = []
    for spec, mse_trans, preds in simple_runs:
        if filter_transform(mse_trans, mse_orig, cfg.closeness):
            violations.extend(check_metamorphic(baseline, preds, cfg.relaxation,
                                                provenance=(spec,), model=model.name))
    for kind in ("fog", "rain"):
        for spec, _, preds in composite_runs[kind]:
            violations.extend(check_metamorphic(baseline, preds, cfg.relaxation,
                                                provenance=(spec,), model=model.name))
    threshold = cfg.relaxation * mse_orig
    for seed_id, chain, theta_t in guided_items:
        err = (label_by_id[seed_id] - theta_t) ** 2
        if err > threshold:
            violations.append(ViolationRecord(seed_id, model.name, chain,
                                              label_by_id[seed_id],
                                              pred_by_id[seed_id], theta_t, err,
                                              threshold))

    section = {
        "baseline_mse": mse_orig,
        "lambda": cfg.relaxation,
        "epsilon": cfg.closeness,
        "sweep": sweep,
        "default_cell": {
            "lambda": cfg.relaxation,
            "epsilon": cfg.closeness,
            "simple_violations": simple_count(cfg.relaxation, cfg.closeness),
            "fog_violations": composite_count("fog", cfg.relaxation),
            "rain_violations": composite_count("rain", cfg.relaxation),
            "guided_violations": guided_count(cfg.relaxation),
        },
        "per_transform_mse": [
            {"kind": spec.kind, "params": list(spec.params), "mse": m,
             "passes_gate": filter_transform(m, mse_orig, cfg.closeness)}
            for spec, m, _ in simple_runs],
        "summary": {f"{cat}|{mdl}": n
                    for (cat, mdl), n in sorted(count_errors(violations).items())},
        "violation_count": len(violations),
    }
    return section, violations
