"""Run configuration: flat `key = value` files plus CLI flag overrides.

The config pins everything a run depends on (paths, thresholds, the rng
seed), and its canonical serialization is hashed into every report so a
report can vouch for the exact configuration that produced it.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .coverage import DEFAULT_THRESHOLD
from .errors import ConfigError
from .oracle import DEFAULT_EPSILON, DEFAULT_LAMBDA
from .transforms import ALL_KINDS, DEFAULT_PARAMS, SIMPLE_KINDS

_DEFAULTS = {
    "model": "",
    "dataset": "",
    "out": "out",
    "threshold": DEFAULT_THRESHOLD,
    "lambda": DEFAULT_LAMBDA,
    "epsilon": DEFAULT_EPSILON,
    "rng_seed": 0,
    "max_failed_tries": 25,
    "max_seeds": 100,          # seed-frame ceiling per run
    "max_params": 10,          # per-transformation parameter ceiling
    "kinds": ",".join(SIMPLE_KINDS),
}


@dataclass(frozen=True)
class RunConfig:
    model_path: str = ""
    dataset_path: str = ""
    out_dir: str = "out"
    threshold: float = DEFAULT_THRESHOLD
    relaxation: float = DEFAULT_LAMBDA
    closeness: float = DEFAULT_EPSILON
    rng_seed: int = 0
    max_failed_tries: int = 25
    max_seeds: int = 100
    max_params: int = 10
    kinds: tuple[str, ...] = SIMPLE_KINDS
    param_table: dict = field(default_factory=lambda: dict(DEFAULT_PARAMS))

    def validate_paths(self, need_model: bool = True, need_dataset: bool = True):
        if need_model and not Path(self.model_path).is_file():
            raise ConfigError(f"model file not found: {self.model_path!r}")
        if need_dataset and not Path(self.dataset_path).is_dir():
            raise ConfigError(f"dataset directory not found: {self.dataset_path!r}")

    def canonical(self) -> str:
        """Stable serialization used for hashing and report embedding."""
        doc = {
            "model": self.model_path,
            "dataset": self.dataset_path,
            "threshold": self.threshold,
            "lambda": self.relaxation,
            "epsilon": self.closeness,
            "rng_seed": self.rng_seed,
            "max_failed_tries": self.max_failed_tries,
            "max_seeds": self.max_seeds,
            "max_params": self.max_params,
            "kinds": list(self.kinds),
            "param_table": {k: [list(p) for p in v]
                            for k, v in sorted(self.param_table.items())},
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return rehash_config(json.loads(self.canonical()))


def rehash_config(config_doc: dict) -> str:
    """Hash of a config document; re-hashing a report's embedded config with
    this function must reproduce the report's recorded hash."""
    text = json.dumps(config_doc, sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(text.encode(), digest_size=16).hexdigest()


def _parse_kinds(text: str) -> tuple[str, ...]:
    kinds = tuple(k.strip() for k in text.split(",") if k.strip())
    for k in kinds:
        if k not in ALL_KINDS:
            raise ConfigError(f"unknown transformation kind {k!r}")
    if not kinds:
        raise ConfigError("at least one transformation kind required")
    return kinds


def parse_config_file(path) -> dict:
    """Flat `key = value` lines; `#` starts a comment; no nesting."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value
    return values


def build_config(file_values: dict | None = None, **overrides) -> RunConfig:
    """Merge defaults, config-file values, and flag overrides (in that order)."""
    merged = dict(_DEFAULTS)
    merged.update(file_values or {})
    for key, value in overrides.items():
        if value is not None:
            merged[key] = value
    try:
        return RunConfig(
            model_path=str(merged["model"]),
            dataset_path=str(merged["dataset"]),
            out_dir=str(merged["out"]),
            threshold=float(merged["threshold"]),
            relaxation=float(merged["lambda"]),
            closeness=float(merged["epsilon"]),
            rng_seed=int(merged["rng_seed"]),
            max_failed_tries=int(merged["max_failed_tries"]),
            max_seeds=int(merged["max_seeds"]),
            max_params=int(merged["max_params"]),
            kinds=_parse_kinds(merged["kinds"]) if isinstance(merged["kinds"], str)
            else tuple(merged["kinds"]),
        )
    except ValueError as exc:
        raise ConfigError(f"bad config value: {exc}") from exc


def with_out_dir(cfg: RunConfig, out_dir) -> RunConfig:
    return replace(cfg, out_dir=str(out_dir))
