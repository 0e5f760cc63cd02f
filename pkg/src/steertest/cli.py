"""Command-line interface.

Subcommands: ingest-check, transform, coverage, study, search, oracle,
report, synth. Every run is pinned by a RunConfig assembled from an
optional flat config file plus flag overrides.

Exit codes: 0 success, 1 usage/config error, 2 ingest/validation error,
3 internal invariant failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, build_config, parse_config_file
from .coverage import activated_set, empty_map, merge, neuron_coverage, to_json
from .dataset import ingest
from .engine import forward
from .errors import ConfigError, SteerTestError
from .experiments import (composite_specs, run_coverage_correlation,
                          run_guided, run_oracle, run_transform_study)
from .image_io import to_model_input, write_image
from .modelio import load_model, save_model
from .report import (report_meta, write_csv, write_json, write_oracle_tables,
                     write_report, write_study_tables, write_violations)
from .search import SearchConfig, guided_search, write_search_result
from .synth import make_dataset, make_model
from .transforms import COMPOSITE_KINDS, TransformSpec, apply, spec_to_json, unique_params


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--model", help="DTNN model file")
    parser.add_argument("--dataset", help="dataset directory (labels.csv + frames)")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--seed", type=int, dest="rng_seed", help="run rng seed")
    parser.add_argument("--lambda", type=float, dest="lambda_",
                        help="metamorphic relaxation factor")
    parser.add_argument("--epsilon", type=float, help="MSE closeness gate")
    parser.add_argument("--threshold", type=float, help="neuron activation threshold")
    parser.add_argument("--max-failed-tries", type=int, help="search patience")
    parser.add_argument("--max-seeds", type=int, help="seed frame ceiling")
    parser.add_argument("--max-params", type=int, help="per-transformation parameter ceiling")
    parser.add_argument("--kinds", help="comma-separated transformation kinds")


def _config_from_args(args) -> RunConfig:
    file_values = parse_config_file(args.config) if args.config else None
    return build_config(
        file_values,
        model=args.model, dataset=args.dataset, out=args.out,
        rng_seed=args.rng_seed, threshold=args.threshold,
        max_failed_tries=args.max_failed_tries, max_seeds=args.max_seeds,
        max_params=args.max_params, kinds=args.kinds,
        **{"lambda": args.lambda_, "epsilon": args.epsilon})


def _prepare(cfg: RunConfig, need_model=True, need_dataset=True):
    cfg.validate_paths(need_model, need_dataset)
    model = load_model(cfg.model_path) if need_model else None
    dataset = ingest(cfg.dataset_path) if need_dataset else None
    return model, dataset


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_ingest_check(args) -> int:
    cfg = _config_from_args(args)
    cfg.validate_paths(need_model=False)
    dataset = ingest(cfg.dataset_path)
    labels = dataset.labels()
    print(f"dataset ok: {len(dataset)} frames, "
          f"labels in [{min(labels):+.3f}, {max(labels):+.3f}]")
    return 0


def cmd_transform(args) -> int:
    cfg = _config_from_args(args)
    _, dataset = _prepare(cfg, need_model=False)
    out = _out_dir(cfg)
    img_dir = out / "transformed"
    img_dir.mkdir(parents=True, exist_ok=True)
    specs_by_kind = {}
    for kind in cfg.kinds:
        if kind in COMPOSITE_KINDS:
            specs_by_kind[kind] = composite_specs(cfg, kind)
        else:
            specs_by_kind[kind] = [
                TransformSpec(kind, params)
                for params in unique_params(cfg.param_table[kind], cfg.max_params)]
    manifest = []
    for frame in dataset.frames[:cfg.max_seeds]:
        img = frame.load()
        ext = "ppm" if img.shape[2] == 3 else "pgm"
        for kind, specs in specs_by_kind.items():
            for i, spec in enumerate(specs):
                name = f"{frame.frame_id}_{kind}_{i}.{ext}"
                write_image(img_dir / name, apply(img, spec))
                manifest.append({"file": name, "frame_id": frame.frame_id,
                                 "spec": spec_to_json(spec)})
    write_json(img_dir / "manifest.json", {"images": manifest})
    print(f"wrote {len(manifest)} transformed images to {img_dir}")
    return 0


def cmd_coverage(args) -> int:
    cfg = _config_from_args(args)
    model, dataset = _prepare(cfg)
    out = _out_dir(cfg)
    rows = []
    combined = empty_map(model)
    for frame in dataset.frames[:cfg.max_seeds]:
        pred, trace = forward(model, to_model_input(frame.load()))
        cov = activated_set(trace, cfg.threshold)
        combined = merge(combined, cov)
        rows.append([frame.frame_id, neuron_coverage(cov), pred])
    write_csv(out / "coverage.csv", ["frame_id", "coverage", "prediction"], rows)
    (out / "coverage_union.json").write_text(to_json(combined) + "\n")
    print(f"combined coverage {neuron_coverage(combined):.4f} "
          f"({len(combined.activated)}/{combined.total}) over {len(rows)} frames")
    return 0


def cmd_study(args) -> int:
    cfg = _config_from_args(args)
    model, dataset = _prepare(cfg)
    out = _out_dir(cfg)
    section = run_transform_study(model, dataset, cfg)
    write_json(out / "study.json", {"meta": report_meta(cfg, model),
                                    "transform_study": section})
    write_study_tables(out, section)
    print(f"study: {section['seed_count']} seeds x "
          f"{section['generated_per_seed']} variants each; "
          f"final mean cumulative coverage "
          f"{section['cumulative']['mean_ratios'][-1]:.4f}")
    return 0


def cmd_search(args) -> int:
    cfg = _config_from_args(args)
    model, dataset = _prepare(cfg)
    out = _out_dir(cfg)
    frames = dataset.frames[:cfg.max_seeds]
    result = guided_search(
        model, [f.load() for f in frames],
        SearchConfig(transformations=cfg.kinds,
                     max_failed_tries=cfg.max_failed_tries,
                     rng_seed=cfg.rng_seed, threshold=cfg.threshold,
                     param_table=cfg.param_table),
        seed_ids=[f.frame_id for f in frames])
    write_search_result(result, out / "generated")
    write_json(out / "search.json", {
        "meta": report_meta(cfg, model),
        "search": {
            "seed_count": len(frames),
            "generated_count": len(result.generated),
            "attempt_count": len(result.attempts),
            "seed_covered": len(result.seed_coverage.activated),
            "final_covered": len(result.final_coverage.activated),
            "total_neurons": result.final_coverage.total,
        }})
    print(f"search: accepted {len(result.generated)} images in "
          f"{len(result.attempts)} attempts; coverage "
          f"{len(result.seed_coverage.activated)} -> "
          f"{len(result.final_coverage.activated)} of {result.final_coverage.total}")
    return 0


def cmd_oracle(args) -> int:
    cfg = _config_from_args(args)
    model, dataset = _prepare(cfg)
    out = _out_dir(cfg)
    section, violations = run_oracle(model, dataset, cfg)
    write_json(out / "oracle.json", {"meta": report_meta(cfg, model),
                                     "oracle": section})
    write_oracle_tables(out, section)
    write_violations(out / "violations.jsonl", violations)
    cell = section["default_cell"]
    print(f"oracle: lambda={cfg.relaxation} epsilon={cfg.closeness}: "
          f"{cell['simple_violations']} simple, {cell['fog_violations']} fog, "
          f"{cell['rain_violations']} rain, {cell['guided_violations']} guided")
    return 0


def cmd_report(args) -> int:
    cfg = _config_from_args(args)
    model, dataset = _prepare(cfg)
    out = _out_dir(cfg)
    sections = {
        "coverage_correlation": run_coverage_correlation(model, dataset, cfg),
        "transform_study": run_transform_study(model, dataset, cfg),
        "guided": run_guided(model, dataset, cfg),
    }
    oracle_section, violations = run_oracle(model, dataset, cfg)
    sections["oracle"] = oracle_section
    path = write_report(out, cfg, model, sections, violations)
    print(f"report written to {path}")
    return 0


def cmd_synth(args) -> int:
    out = Path(args.out or "demo")
    out.mkdir(parents=True, exist_ok=True)
    hw = tuple(int(v) for v in args.size.split("x"))
    if len(hw) != 2:
        raise ConfigError("--size must look like 16x16")
    model = make_model(args.model_kind, args.rng_seed or 0, hw, args.channels)
    model_path = out / "model.dtnn"
    save_model(model, model_path)
    data_dir = make_dataset(out / "dataset", n_frames=args.frames, image_hw=hw,
                            channels=args.channels, seed=args.rng_seed or 0,
                            model=model)
    print(f"wrote {model_path} and {data_dir} ({args.frames} frames)")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="steertest",
        description="Coverage-guided metamorphic testing for steering models")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    commands = {
        "ingest-check": (cmd_ingest_check, "validate a dataset directory"),
        "transform": (cmd_transform, "write the transformed image grid"),
        "coverage": (cmd_coverage, "per-frame neuron coverage"),
        "study": (cmd_study, "transformation coverage study"),
        "search": (cmd_search, "coverage-guided greedy search"),
        "oracle": (cmd_oracle, "metamorphic violation sweep"),
        "report": (cmd_report, "full report with tables and figures"),
    }
    for name, (func, help_text) in commands.items():
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        p.set_defaults(func=func)
    p = sub.add_parser("synth", help="generate a demo model and dataset")
    p.add_argument("--out", help="output directory (default demo)")
    p.add_argument("--frames", type=int, default=12)
    p.add_argument("--size", default="16x16", help="frame size HxW")
    p.add_argument("--channels", type=int, default=3, choices=(1, 3))
    p.add_argument("--model-kind", default="cnn",
                   choices=("cnn", "lstm", "dense", "zero"))
    p.add_argument("--seed", type=int, dest="rng_seed", default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SteerTestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal invariant failure
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
