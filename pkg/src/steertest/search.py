"""Coverage-guided greedy search over transformation combinations.

The search keeps a stack of images seeded with the inputs. For each popped
image it draws a pair of transformations (the first preferentially from a
FIFO queue of previously successful kinds), applies them in sequence, and
accepts the result iff it raises the global cumulative neuron coverage; an
accepted image is pushed back on the stack for further combination, and the
popped image stays the base for the rest of its try loop. The loop for one
image ends after max_failed_tries consecutive failures are exceeded.

All randomness comes from one splitmix64 stream seeded by the config, so a
run is fully reproducible, including the audit log order.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coverage import CoverageMap, activated_set, empty_map, merge, to_json
from .engine import ActivationTrace, Model, forward
from .errors import ConfigError
from .image_io import to_model_input, write_image
from .rng import SplitMix64
from .transforms import (DEFAULT_PARAMS, SIMPLE_KINDS, TransformSpec, apply,
                         spec_to_json)


@dataclass(frozen=True)
class SearchConfig:
    transformations: tuple[str, ...] = SIMPLE_KINDS
    max_failed_tries: int = 25
    rng_seed: int = 0
    threshold: float = 0.2
    param_table: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))

    def __post_init__(self):
        if self.max_failed_tries < 1:
            raise ConfigError("max_failed_tries must be >= 1")
        if not self.transformations:
            raise ConfigError("at least one transformation kind must be enabled")
        for kind in self.transformations:
            if kind not in self.param_table or not self.param_table[kind]:
                raise ConfigError(f"no parameter grid for transformation {kind!r}")


@dataclass(frozen=True)
class Attempt:
    """One accepted or rejected candidate in the audit log."""
    base: str
    first: TransformSpec
    second: TransformSpec
    accepted: bool
    covered_before: int
    covered_after: int


@dataclass(frozen=True)
class GeneratedImage:
    name: str
    seed_id: str
    chain: tuple[TransformSpec, ...]
    image: np.ndarray
    covered_after: int
    coverage_gain: int


@dataclass
class SearchResult:
    generated: list[GeneratedImage]
    final_coverage: CoverageMap
    attempts: list[Attempt]
    seed_coverage: CoverageMap


def cov_inc(current: CoverageMap, candidate_trace: ActivationTrace,
            threshold: float) -> tuple[bool, CoverageMap]:
    """Whether the candidate's activations add any neuron; merged map either way."""
    merged = merge(current, activated_set(candidate_trace, threshold))
    return len(merged.activated) > len(current.activated), merged


def _draw_spec(kind: str, stream: SplitMix64, param_table) -> TransformSpec:
    params = stream.choice(param_table[kind])
    if kind in ("rain", "fog"):
        # grids fix the intensity; the effect seed comes from the run stream
        params = (stream.next_u64(),) + tuple(params)
    return TransformSpec(kind, tuple(params))


def guided_search(model: Model, seeds, cfg: SearchConfig,
                  seed_ids=None) -> SearchResult:
    """Greedy transformation-combination search over the seed images."""
    seeds = list(seeds)
    if seed_ids is None:
        seed_ids = [f"seed{i}" for i in range(len(seeds))]
    if len(seed_ids) != len(seeds):
        raise ConfigError("seed_ids must align with seeds")
    if not seeds:
        return SearchResult([], empty_map(model), [], empty_map(model))

    current = empty_map(model)
    for img in seeds:
        _, trace = forward(model, to_model_input(img))
        current = merge(current, activated_set(trace, cfg.threshold))
    seed_coverage = current

    stream = SplitMix64(cfg.rng_seed)
    stack = [(sid, sid, img, ()) for sid, img in zip(seed_ids, seeds)]
    generated: list[GeneratedImage] = []
    attempts: list[Attempt] = []
    per_seed_count = {sid: 0 for sid in seed_ids}

    while stack:
        name, seed_id, image, chain = stack.pop()
        tqueue: deque[str] = deque()
        failed = 0
        while failed <= cfg.max_failed_tries:
            if tqueue:
                kind1 = tqueue.popleft()
            else:
                kind1 = stream.choice(cfg.transformations)
            spec1 = _draw_spec(kind1, stream, cfg.param_table)
            kind2 = stream.choice(cfg.transformations)
            spec2 = _draw_spec(kind2, stream, cfg.param_table)
            candidate = apply(apply(image, spec1), spec2)
            _, trace = forward(model, to_model_input(candidate))
            increased, merged = cov_inc(current, trace, cfg.threshold)
            attempts.append(Attempt(name, spec1, spec2, increased,
                                    len(current.activated), len(merged.activated)))
            if increased:
                tqueue.append(kind1)
                tqueue.append(kind2)
                gain = len(merged.activated) - len(current.activated)
                current = merged
                per_seed_count[seed_id] += 1
                child_name = f"{seed_id}_{per_seed_count[seed_id]}"
                child_chain = chain + (spec1, spec2)
                generated.append(GeneratedImage(child_name, seed_id, child_chain,
                                                candidate, len(current.activated),
                                                gain))
                stack.append((child_name, seed_id, candidate, child_chain))
            else:
                failed += 1

    return SearchResult(generated, current, attempts, seed_coverage)


def write_search_result(result: SearchResult, out_dir) -> Path:
    """Images named <seed_id>_<k>.ppm/.pgm plus a provenance manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    entries = []
    for gen in result.generated:
        ext = "ppm" if gen.image.shape[2] == 3 else "pgm"
        fname = f"{gen.name}.{ext}"
        write_image(out_dir / fname, gen.image)
        entries.append({
            "name": gen.name,
            "seed_id": gen.seed_id,
            "file": fname,
            "chain": [spec_to_json(s) for s in gen.chain],
            "covered_after": gen.covered_after,
            "coverage_gain": gen.coverage_gain,
        })
    manifest = {
        "generated": entries,
        "seed_covered": len(result.seed_coverage.activated),
        "final_covered": len(result.final_coverage.activated),
        "total_neurons": result.final_coverage.total,
        "attempts": [{
            "base": a.base,
            "first": spec_to_json(a.first),
            "second": spec_to_json(a.second),
            "accepted": a.accepted,
            "covered_before": a.covered_before,
            "covered_after": a.covered_after,
        } for a in result.attempts],
        "final_coverage": json.loads(to_json(result.final_coverage)),
    }
    path = out_dir / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path
