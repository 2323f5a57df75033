"""Delimited result files plus rendered figures.

Every writer here emits deterministic CSV: fixed column order, rows in a
stable order, and floats via ``repr`` so identical runs produce identical
bytes. The figure renderers read those CSVs back, so figures always depict
exactly what was written to disk.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import DataFormatError  # noqa: E402
from .experiments.saturation import SaturationPoint  # noqa: E402
from .experiments.tasks import TaskReport  # noqa: E402
from .forest import ForestIntrospection  # noqa: E402
from .gnn import SweepResult  # noqa: E402

REPORT_COLUMNS = ("task", "model", "features", "run", "accuracy", "f1_macro")
SWEEP_COLUMNS = (
    "trial", "status", "val_accuracy", "epochs_run",
    "learning_rate", "hidden_dim", "n_layers", "dropout", "weight_decay", "batch_size",
)
SATURATION_COLUMNS = ("fraction_prev", "fraction", "mean_distance", "std_distance")


def _fmt(x: float) -> str:
    return repr(float(x))


def write_task_reports(reports: Sequence[TaskReport], path: str | Path) -> int:
    """Per-run rows followed by ``mean``/``std`` rows for each report."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(REPORT_COLUMNS) + "\n")
        for rep in reports:
            for run, (acc, f1) in enumerate(zip(rep.accuracies, rep.f1_macros)):
                fh.write(f"{rep.task},{rep.model},{rep.features},{run},{_fmt(acc)},{_fmt(f1)}\n")
                n += 1
            fh.write(f"{rep.task},{rep.model},{rep.features},mean,{_fmt(rep.mean_accuracy)},{_fmt(rep.mean_f1)}\n")
            fh.write(f"{rep.task},{rep.model},{rep.features},std,{_fmt(rep.std_accuracy)},{_fmt(rep.std_f1)}\n")
            n += 2
    return n


def write_sweep(result: SweepResult, path: str | Path) -> int:
    """One row per trial, in trial order; failed trials keep their reason."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SWEEP_COLUMNS) + "\n")
        for t in result.trials:
            status = t.status.replace(",", ";")
            val = "" if t.status != "ok" else _fmt(t.val_accuracy)
            c = t.config
            fh.write(
                f"{t.index},{status},{val},{t.epochs_run},"
                f"{_fmt(c.learning_rate)},{c.hidden_dim},{c.n_layers},"
                f"{_fmt(c.dropout)},{_fmt(c.weight_decay)},{c.batch_size}\n"
            )
    return len(result.trials)


def write_saturation(points: Sequence[SaturationPoint], path: str | Path) -> int:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(",".join(SATURATION_COLUMNS) + "\n")
        for p in points:
            fh.write(f"{_fmt(p.fraction_prev)},{_fmt(p.fraction)},{_fmt(p.mean_distance)},{_fmt(p.std_distance)}\n")
    return len(points)


def write_introspection(intro: ForestIntrospection, path: str | Path) -> None:
    """Two sections: per-tree average leaf depth, cumulative split gain by depth."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("section,index,value\n")
        for i, d in enumerate(intro.avg_leaf_depths):
            fh.write(f"avg_leaf_depth,{i},{_fmt(d)}\n")
        for depth, g in enumerate(intro.cumulative_gini_by_depth):
            fh.write(f"cumulative_gini,{depth},{_fmt(g)}\n")


def read_csv(path: str | Path) -> tuple[list[str], list[dict[str, str]]]:
    """Header and row dicts of a delimited file written by this package."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty delimited file")
        return list(reader.fieldnames), list(reader)


# ------------------------------------------------------------------ figures


def _save(fig, out: Path) -> Path:
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=120)
    plt.close(fig)
    return out


def figure_accuracy_bars(report_csv: str | Path, out: str | Path) -> Path:
    """Mean test accuracy with a std whisker, one bar per (task, model, features)."""
    _, rows = read_csv(report_csv)
    means = [(f"{r['task']}\n{r['model']}/{r['features']}", float(r["accuracy"])) for r in rows if r["run"] == "mean"]
    stds = [float(r["accuracy"]) for r in rows if r["run"] == "std"]
    fig, ax = plt.subplots(figsize=(max(4.0, 1.6 * len(means)), 4.0))
    labels = [m[0] for m in means]
    vals = [m[1] for m in means]
    ax.bar(range(len(vals)), vals, yerr=stds if len(stds) == len(vals) else None, color="#4878d0", capsize=4)
    ax.axhline(0.5, color="gray", linestyle="--", linewidth=1, label="chance")
    ax.set_xticks(range(len(vals)))
    ax.set_xticklabels(labels, fontsize=7)
    ax.set_ylim(0.0, 1.05)
    ax.set_ylabel("test accuracy")
    ax.legend(loc="lower right", fontsize=7)
    fig.tight_layout()
    return _save(fig, Path(out))


def figure_structural_box(structural_csv: str | Path, out: str | Path,
                          columns: tuple[str, ...] = ("mean_degree", "clustering_mean", "degree_max_to_mean", "closeness_mean")) -> Path:
    """Distribution of selected aggregate columns, grouped by provenance."""
    _, rows = read_csv(structural_csv)
    provs = sorted({r["provenance"] for r in rows})
    fig, axes = plt.subplots(1, len(columns), figsize=(3.2 * len(columns), 3.6))
    if len(columns) == 1:
        axes = [axes]
    for ax, col in zip(axes, columns):
        data = [[float(r[col]) for r in rows if r["provenance"] == p] for p in provs]
        ax.boxplot(data, tick_labels=provs)
        ax.set_title(col, fontsize=9)
        ax.tick_params(axis="x", labelrotation=45, labelsize=7)
    fig.tight_layout()
    return _save(fig, Path(out))


def figure_alignment_hist(semantic_csv: str | Path, out: str | Path, column: str = "focal_ref_cosine_mean") -> Path:
    """Histogram of one alignment diagnostic, overlaid per provenance."""
    _, rows = read_csv(semantic_csv)
    provs = sorted({r["provenance"] for r in rows})
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for p in provs:
        vals = [float(r[column]) for r in rows if r["provenance"] == p and r[column] != ""]
        if vals:
            ax.hist(vals, bins=30, alpha=0.55, label=p)
    ax.set_xlabel(column)
    ax.set_ylabel("graphs")
    ax.legend(fontsize=7)
    fig.tight_layout()
    return _save(fig, Path(out))


def figure_sweep(sweep_csv: str | Path, out: str | Path) -> Path:
    """Validation accuracy of every successful trial against learning rate."""
    _, rows = read_csv(sweep_csv)
    ok = [r for r in rows if r["status"] == "ok"]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if ok:
        lrs = [float(r["learning_rate"]) for r in ok]
        vals = [float(r["val_accuracy"]) for r in ok]
        hidden = [float(r["hidden_dim"]) for r in ok]
        sc = ax.scatter(lrs, vals, c=hidden, cmap="viridis", s=24)
        fig.colorbar(sc, ax=ax, label="hidden dim")
    ax.set_xscale("log")
    ax.set_xlabel("learning rate")
    ax.set_ylabel("val accuracy")
    fig.tight_layout()
    return _save(fig, Path(out))


def figure_saturation(saturation_csv: str | Path, out: str | Path) -> Path:
    """Mean distance between successive cumulative samples, with std band."""
    _, rows = read_csv(saturation_csv)
    fracs = [float(r["fraction"]) for r in rows]
    means = [float(r["mean_distance"]) for r in rows]
    stds = [float(r["std_distance"]) for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.errorbar(fracs, means, yerr=stds, marker="o", capsize=3)
    ax.set_xlabel("cumulative fraction of runs")
    ax.set_ylabel("distance to previous fraction")
    ax.set_ylim(bottom=0)
    fig.tight_layout()
    return _save(fig, Path(out))


FIGURE_SOURCES = {
    "report.csv": ("accuracy_bars.png", figure_accuracy_bars),
    "structural.csv": ("structural_box.png", figure_structural_box),
    "semantic.csv": ("alignment_hist.png", figure_alignment_hist),
    "sweep.csv": ("sweep_scatter.png", figure_sweep),
    "saturation.csv": ("saturation_curve.png", figure_saturation),
}


def render_figures(run_dir: str | Path, out_dir: str | Path | None = None) -> list[Path]:
    """Render a figure for every known CSV present under ``run_dir``."""
    run_dir = Path(run_dir)
    out_dir = run_dir if out_dir is None else Path(out_dir)
    written: list[Path] = []
    for name, (png, fn) in sorted(FIGURE_SOURCES.items()):
        src = run_dir / name
        if src.exists():
            written.append(fn(src, out_dir / png))
    return written
