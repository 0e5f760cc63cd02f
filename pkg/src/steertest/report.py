"""Report emission: one self-contained JSON document, delimited CSV tables,
violation JSON-lines, and matplotlib figures rendered alongside them.

Everything written here is a pure function of the section dicts, so a rerun
with the same RunConfig reproduces every file byte-for-byte (figures are
rendered on the Agg backend with fixed geometry and stripped metadata).
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import __version__  # noqa: E402
from .config import RunConfig  # noqa: E402
from .oracle import violation_to_json  # noqa: E402


def write_json(path, doc) -> None:
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def report_meta(cfg: RunConfig, model) -> dict:
    return {
        "toolkit_version": __version__,
        "config_hash": cfg.config_hash(),
        "config": json.loads(cfg.canonical()),
        "model_name": model.name,
        "model_fingerprint": model.fingerprint,
        "total_neurons": model.total_neurons,
    }


def write_violations(path, violations) -> None:
    with open(path, "w") as fh:
        for v in violations:
            fh.write(violation_to_json(v))
            fh.write("\n")


def write_study_tables(out_dir: Path, study: dict) -> None:
    kinds = study["jaccard_median"]["kinds"]
    write_csv(out_dir / "study_jaccard.csv", ["kind"] + kinds,
              [[kind] + row for kind, row in zip(kinds, study["jaccard_median"]["matrix"])])
    cum = study["cumulative"]
    write_csv(out_dir / "study_cumulative.csv",
              ["n_transformations", "kind_added", "mean_covered", "mean_ratio"],
              [[i + 1, kind, cnt, ratio]
               for i, (kind, cnt, ratio) in enumerate(
                   zip(cum["kinds"], cum["mean_counts"], cum["mean_ratios"]))])
    write_csv(out_dir / "study_increase.csv",
              ["kind", "median_pct_increase"],
              [[kind, info["median_pct"]] for kind, info in study["increase"].items()])


def write_oracle_tables(out_dir: Path, section: dict) -> None:
    sweep = section["sweep"]
    header = (["lambda"] + [f"eps_{e}" for e in sweep["epsilons"]]
              + ["fog", "rain", "guided"])
    rows = []
    for i, lam in enumerate(sweep["lambdas"]):
        rows.append([lam] + list(sweep["simple"][i])
                    + [sweep["fog"][i], sweep["rain"][i], sweep["guided"][i]])
    write_csv(out_dir / "oracle_sweep.csv", header, rows)
    # pivot: transformation rows, one column per model
    cells = {tuple(key.split("|")): count
             for key, count in section["summary"].items()}
    models = sorted({model for _, model in cells})
    categories = sorted({cat for cat, _ in cells})
    write_csv(out_dir / "oracle_summary.csv",
              ["transformation"] + models,
              [[cat] + [cells.get((cat, model), 0) for model in models]
               for cat in categories])


def write_correlation_table(out_dir: Path, section: dict) -> None:
    write_csv(out_dir / "correlation.csv",
              ["frame_id", "coverage", "prediction", "label"],
              [[r["frame_id"], r["coverage"], r["prediction"], r["label"]]
               for r in section["frames"]])


def _save(fig, path) -> None:
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)


def render_figures(fig_dir: Path, sections: dict) -> list[str]:
    """Render the report figures; returns the written file names."""
    fig_dir.mkdir(parents=True, exist_ok=True)
    written = []

    study = sections.get("transform_study")
    if study:
        cum = study["cumulative"]
        fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
        xs = range(1, len(cum["kinds"]) + 1)
        ax.plot(xs, cum["mean_ratios"], marker="o")
        ax.set_xticks(list(xs), cum["kinds"], rotation=45, ha="right")
        ax.set_ylabel("mean cumulative coverage")
        ax.set_xlabel("transformations accumulated")
        fig.tight_layout()
        _save(fig, fig_dir / "cumulative_coverage.png")
        written.append("cumulative_coverage.png")

        kinds = study["jaccard_median"]["kinds"]
        fig, ax = plt.subplots(figsize=(5.5, 4.5), dpi=100)
        im = ax.imshow(study["jaccard_median"]["matrix"], vmin=0.0, vmax=1.0,
                       cmap="viridis")
        ax.set_xticks(range(len(kinds)), kinds, rotation=45, ha="right")
        ax.set_yticks(range(len(kinds)), kinds)
        fig.colorbar(im, ax=ax, label="median Jaccard distance")
        fig.tight_layout()
        _save(fig, fig_dir / "jaccard_matrix.png")
        written.append("jaccard_matrix.png")

        fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
        pairs = [(k, v["median_pct"]) for k, v in study["increase"].items()
                 if v["median_pct"] is not None]
        if pairs:
            ax.bar([p[0] for p in pairs], [100.0 * p[1] for p in pairs])
            ax.set_ylabel("median coverage increase (%)")
            ax.tick_params(axis="x", rotation=45)
        fig.tight_layout()
        _save(fig, fig_dir / "transform_increase.png")
        written.append("transform_increase.png")

    oracle = sections.get("oracle")
    if oracle:
        sweep = oracle["sweep"]
        fig, ax = plt.subplots(figsize=(6, 4), dpi=100)
        for j, eps in enumerate(sweep["epsilons"]):
            default = eps == oracle["epsilon"]
            ax.plot(sweep["lambdas"], [row[j] for row in sweep["simple"]],
                    marker="o", linewidth=2.5 if default else 1.0,
                    label=f"eps={eps}" + (" (configured)" if default else ""))
        ax.axvline(oracle["lambda"], color="gray", linestyle="--", linewidth=1,
                   label="configured lambda")
        ax.set_xlabel("lambda")
        ax.set_ylabel("violations (simple transformations)")
        ax.legend(fontsize=8)
        fig.tight_layout()
        _save(fig, fig_dir / "violation_sweep.png")
        written.append("violation_sweep.png")

    guided = sections.get("guided")
    if guided:
        fig, ax = plt.subplots(figsize=(5, 4), dpi=100)
        names = ["baseline", "cumulative", "guided"]
        values = [guided["baseline_ratio"], guided["cumulative_ratio"],
                  guided["guided_ratio"]]
        ax.bar(names, values)
        ax.set_ylabel("neuron coverage")
        fig.tight_layout()
        _save(fig, fig_dir / "guided_coverage.png")
        written.append("guided_coverage.png")

    return written


def write_report(out_dir, cfg: RunConfig, model, sections: dict,
                 violations=None, figures: bool = True) -> Path:
    """Assemble report.json plus tables and figures under out_dir."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    doc = {"meta": report_meta(cfg, model), "sections": sections}
    if "coverage_correlation" in sections:
        write_correlation_table(out_dir, sections["coverage_correlation"])
    if "transform_study" in sections:
        write_study_tables(out_dir, sections["transform_study"])
    if "oracle" in sections:
        write_oracle_tables(out_dir, sections["oracle"])
        if violations is not None:
            write_violations(out_dir / "violations.jsonl", violations)
    if figures:
        doc["figures"] = render_figures(out_dir / "figures", sections)
    path = out_dir / "report.json"
    write_json(path, doc)
    return path
