"""Command-line entry points.

Every subcommand reads an optional JSON config (``--config``) whose keys
match the long option names; explicit flags override config values, which
override built-in defaults. Writers are deterministic: the same inputs,
seed, and package version produce byte-identical delimited files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import report as reporting
from .baselines import field_shuffle, year_violation_fraction
from .data import (
    EMBEDDINGS_FILE,
    Dataset,
    EmbeddingTable,
    load_dataset_dir,
    load_embeddings,
)
from .errors import CitefpError
from .experiments import synth as synthmod
from .experiments.pipeline import build_pairs, node_feature_fn
from .experiments.saturation import DEFAULT_FRACTIONS, saturation_curve
from .experiments.tasks import (
    TaskData,
    fit_fold_forest,
    fit_fold_gnn,
    fold_tensors,
    label_permutation_control,
    make_task_data,
    parse_task,
    pca_k_curve,
    random_vector_control,
    run_gnn_task,
    run_rf_task,
    split_for_run,
)
from .forest import RfConfig, forest_introspection, save_forest
from .gnn import GnnConfig, random_search
from .gnn.layers import save_model
from .gnn.presets import final_config
from .graphs import write_graphs
from .semantic import (
    graph_embedding,
    isolated_node_similarity,
    write_graph_embeddings,
    write_semantic_features,
)
from .structural import write_structural_features


class CliError(Exception):
    """A usage problem surfaced to the operator, not a bug."""


# ------------------------------------------------------------ option merging


def _merge(args: argparse.Namespace, defaults: dict):
    """Flags override config values override ``defaults``."""
    cfg = {}
    if getattr(args, "config", None):
        try:
            cfg = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(cfg, dict):
            raise CliError(f"config {args.config} must hold a JSON object")
        unknown = sorted(set(cfg) - set(defaults))
        if unknown:
            raise CliError(f"config {args.config} has unknown keys: {', '.join(unknown)}")
    merged = argparse.Namespace()
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        setattr(merged, key, flag if flag is not None else cfg.get(key, default))
    return merged


def _require(opts, *keys: str) -> None:
    for key in keys:
        if getattr(opts, key) in (None, ""):
            raise CliError(f"--{key.replace('_', '-')} is required (flag or config)")


def _csv_list(value) -> tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, (list, tuple)):
        return tuple(str(v) for v in value)
    return tuple(s for s in str(value).split(",") if s)


def _load_data(opts) -> Dataset:
    return load_dataset_dir(opts.data)


def _load_table(opts, required: bool = True) -> EmbeddingTable | None:
    path = Path(opts.data) / EMBEDDINGS_FILE
    if not path.exists():
        if required:
            raise CliError(f"{path} not found; this command needs embeddings")
        return None
    return load_embeddings(path)


def _resolve_generator(dataset: Dataset, opts) -> str:
    if getattr(opts, "generator", None):
        if opts.generator not in dataset.generators():
            raise CliError(f"generator {opts.generator!r} not in dataset (has {list(dataset.generators())})")
        return opts.generator
    gens = dataset.generators()
    if len(gens) != 1:
        raise CliError(f"dataset has generators {list(gens)}; pick one with --generator")
    return gens[0]


def _task_data(dataset: Dataset, table, opts) -> tuple[TaskData, str]:
    generator = _resolve_generator(dataset, opts)
    label_a, label_b = parse_task(opts.task, dataset)
    pair_set = build_pairs(dataset, generator, seed=opts.seed)
    return make_task_data(pair_set, dataset, label_a, label_b), generator


# ------------------------------------------------------------- subcommands


_SYNTH = synthmod.SynthParams()

SYNTH_DEFAULTS = dict(
    out=None, focals=_SYNTH.n_focals, dim=_SYNTH.dim, seed=_SYNTH.seed,
    generators=",".join(_SYNTH.generators), baselines=",".join(str(k) for k in _SYNTH.baseline_kinds),
    drift=_SYNTH.drift, share_frac=_SYNTH.share_frac, isolated_frac=_SYNTH.isolated_frac,
    postdate_frac=_SYNTH.postdate_frac, missing_meta_frac=_SYNTH.missing_meta_frac,
    ref_min=_SYNTH.ref_range[0], ref_max=_SYNTH.ref_range[1], fields=_SYNTH.n_fields,
)


def cmd_synth(args) -> int:
    opts = _merge(args, SYNTH_DEFAULTS)
    _require(opts, "out")
    params = synthmod.SynthParams(
        n_focals=int(opts.focals),
        dim=int(opts.dim),
        seed=int(opts.seed),
        generators=_csv_list(opts.generators),
        baseline_kinds=_csv_list(opts.baselines),
        drift=float(opts.drift),
        share_frac=float(opts.share_frac),
        isolated_frac=float(opts.isolated_frac),
        postdate_frac=float(opts.postdate_frac),
        missing_meta_frac=float(opts.missing_meta_frac),
        ref_range=(int(opts.ref_min), int(opts.ref_max)),
        n_fields=int(opts.fields),
    )
    dataset, table = synthmod.generate(params, out_dir=opts.out)
    papers, edges, lists = dataset.counts
    print(f"wrote synthetic corpus to {opts.out}")
    print(f"papers={papers} edges={edges} reflists={lists} embeddings={len(table)} dim={table.dim}")
    return 0


INGEST_DEFAULTS = dict(data=None, out=None)


def cmd_ingest(args) -> int:
    opts = _merge(args, INGEST_DEFAULTS)
    _require(opts, "data")
    dataset = _load_data(opts)
    table = _load_table(opts, required=False)
    papers, edges, lists = dataset.counts
    summary = {
        "papers": papers,
        "edges": edges,
        "reflists": lists,
        "duplicate_edges_dropped": dataset.duplicate_edge_count,
        "generators": list(dataset.generators()),
        "baseline_kinds": [k.value for k in dataset.baseline_kinds()],
        "focals_with_ground_truth": len(dataset.focal_ids("ground_truth")),
        "unresolved_references": len(dataset.unresolved_refs),
        "embeddings": 0 if table is None else len(table),
        "embedding_dim": None if table is None else table.dim,
    }
    for key, value in summary.items():
        print(f"{key}: {value}")
    if opts.out:
        out = Path(opts.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {out / 'summary.json'}")
    return 0


BASELINE_DEFAULTS = dict(data=None, out=None, kind="field", seed=0, min_subfield_pool=30)


def cmd_baseline(args) -> int:
    opts = _merge(args, BASELINE_DEFAULTS)
    _require(opts, "data", "out")
    dataset = _load_data(opts)
    result = field_shuffle(dataset, opts.kind, seed=int(opts.seed), min_subfield_pool=int(opts.min_subfield_pool))
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "reflists.jsonl", "w", encoding="utf-8") as fh:
        for lst in result.lists:
            fh.write(json.dumps(lst.to_dict(), sort_keys=True) + "\n")
    with open(out / "pool_sizes.csv", "w", encoding="utf-8") as fh:
        fh.write("stratum,size\n")
        for key in sorted(result.pool_sizes):
            fh.write(f"{key},{result.pool_sizes[key]}\n")
    violations = year_violation_fraction(dataset, result.lists)
    print(f"kind={result.kind.value} lists={len(result.lists)} strata={len(result.pool_sizes)}")
    print(f"post_dated_fraction={violations!r}")
    print(f"wrote {out / 'reflists.jsonl'} and {out / 'pool_sizes.csv'}")
    return 0


BUILD_DEFAULTS = dict(data=None, out=None, generator=None, seed=0, raw_sizes=False)


def cmd_build_graphs(args) -> int:
    opts = _merge(args, BUILD_DEFAULTS)
    _require(opts, "data", "out")
    dataset = _load_data(opts)
    generator = _resolve_generator(dataset, opts)
    pair_set = build_pairs(dataset, generator, seed=int(opts.seed), size_matched=not opts.raw_sizes)
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)
    graphs = []
    for pair in pair_set.pairs:
        graphs.append(pair.full)
        graphs.extend(pair.graphs())
    n = write_graphs(graphs, out / "graphs.jsonl")
    with open(out / "pairs.csv", "w", encoding="utf-8") as fh:
        fh.write("focal_id,gt_refs,gen_refs,generated_resolvable,baselines,notes\n")
        for pair in pair_set.pairs:
            fh.write(
                f"{pair.focal},{len(pair.ground_truth.reference_nodes)},{len(pair.generated.reference_nodes)},"
                f"{pair.generated_resolvable},{len(pair.baselines)},{';'.join(pair.notes)}\n"
            )
    with open(out / "dropped.csv", "w", encoding="utf-8") as fh:
        fh.write("focal_id,reason\n")
        for focal in pair_set.dropped:
            fh.write(f"{focal},no_resolvable_generated_reference\n")
        for focal in pair_set.skipped:
            fh.write(f"{focal},missing_reference_list\n")
    print(f"generator={generator} pairs={len(pair_set.pairs)} dropped={len(pair_set.dropped)} graphs={n}")
    print(f"wrote {out / 'graphs.jsonl'}, {out / 'pairs.csv'}, {out / 'dropped.csv'}")
    return 0


FEATURES_DEFAULTS = dict(data=None, out=None, generator=None, seed=0)


def cmd_features(args) -> int:
    opts = _merge(args, FEATURES_DEFAULTS)
    _require(opts, "data", "out")
    dataset = _load_data(opts)
    table = _load_table(opts)
    generator = _resolve_generator(dataset, opts)
    pair_set = build_pairs(dataset, generator, seed=int(opts.seed))
    out = Path(opts.out)
    out.mkdir(parents=True, exist_ok=True)

    split_graphs = [g for pair in pair_set.pairs for g in pair.graphs()]
    n_struct = write_structural_features(split_graphs, out / "structural.csv")
    n_sem = write_semantic_features(split_graphs, table, out / "semantic.csv")
    rows = [
        (f"{g.focal}|{g.provenance.label}", graph_embedding(g, table).ref_sum)
        for g in split_graphs
    ]
    write_graph_embeddings(rows, table.dim, out / "graph_embeddings.bin")
    with open(out / "isolated.csv", "w", encoding="utf-8") as fh:
        fh.write("focal_id,category,mean_cosine\n")
        for pair in pair_set.pairs:
            by_cat = isolated_node_similarity(pair.full, table)
            for cat in sorted(by_cat, key=lambda c: c.value):
                for value in by_cat[cat]:
                    fh.write(f"{pair.focal},{cat.value},{value!r}\n")
    print(f"generator={generator} graphs={n_struct} semantic_rows={n_sem}")
    print(f"wrote structural.csv, semantic.csv, graph_embeddings.bin, isolated.csv under {out}")
    return 0


CLASSIFY_DEFAULTS = dict(
    data=None, out=None, generator=None, task="gt-vs-gen", features="structural",
    runs=10, seed=0, trees=100, control="none", pca_ks=None,
)


def cmd_classify_rf(args) -> int:
    opts = _merge(args, CLASSIFY_DEFAULTS)
    _require(opts, "data", "out")
    if opts.features not in ("structural", "embedding"):
        raise CliError(f"unknown --features {opts.features!r}")
    if opts.control not in ("none", "permuted-labels", "random-vectors"):
        raise CliError(f"unknown --control {opts.control!r}")
    dataset = _load_data(opts)
    table = _load_table(opts, required=(opts.features == "embedding" or opts.control == "random-vectors" or opts.pca_ks is not None))
    opts.seed = int(opts.seed)
    data, generator = _task_data(dataset, table, opts)
    config = RfConfig(n_trees=int(opts.trees), seed=0)
    reports = []
    if opts.control == "none":
        reports.append(run_rf_task(data, opts.features, table, n_runs=int(opts.runs), seed=opts.seed, config=config))
    elif opts.control == "permuted-labels":
        reports.append(label_permutation_control(data, opts.features, table, n_runs=int(opts.runs), seed=opts.seed, config=config))
    else:
        assert table is not None
        reports.append(random_vector_control(data, table.dim, n_runs=int(opts.runs), seed=opts.seed, config=config))
    if opts.pca_ks is not None:
        ks = tuple(int(k) for k in _csv_list(opts.pca_ks))
        assert table is not None
        for _, rep in sorted(pca_k_curve(data, table, ks=ks, n_runs=int(opts.runs), seed=opts.seed, config=config).items()):
            reports.append(rep)

    out = Path(opts.out)
    reporting.write_task_reports(reports, out / "report.csv")
    if opts.control == "none":
        forest = fit_fold_forest(data, opts.features, table, seed=opts.seed, run=0, config=config)
        save_forest(forest, out / "forest.json")
        reporting.write_introspection(forest_introspection(forest), out / "introspection.csv")
    for rep in reports:
        print(f"{rep.task} [{rep.model}/{rep.features}] "
              f"acc={rep.mean_accuracy!r} std={rep.std_accuracy!r} f1={rep.mean_f1!r} runs={rep.n_runs}")
    print(f"generator={generator}; wrote results under {out}")
    return 0


TRAIN_GNN_DEFAULTS = dict(
    data=None, out=None, generator=None, task="gt-vs-gen", arch="gcn", features="embedding",
    runs=5, seed=0, preset=None, hidden=64, layers=2, lr=1e-3, dropout=0.0,
    weight_decay=0.0, batch=10000, epochs=500, patience=15,
)


def cmd_train_gnn(args) -> int:
    opts = _merge(args, TRAIN_GNN_DEFAULTS)
    _require(opts, "data", "out")
    dataset = _load_data(opts)
    table = _load_table(opts, required=(opts.features == "embedding"))
    opts.seed = int(opts.seed)
    data, generator = _task_data(dataset, table, opts)
    feature_fn = node_feature_fn(opts.features, table)
    input_dim = feature_fn(data.graphs_a[0]).shape[1]
    if opts.preset:
        config = final_config(opts.preset, opts.features, opts.arch, input_dim)
    else:
        config = GnnConfig(
            arch=opts.arch, input_dim=input_dim, hidden_dim=int(opts.hidden), n_layers=int(opts.layers),
            learning_rate=float(opts.lr), dropout=float(opts.dropout), weight_decay=float(opts.weight_decay),
            batch_size=int(opts.batch), max_epochs=int(opts.epochs), patience=int(opts.patience),
        )
    report = run_gnn_task(data, opts.arch, opts.features, table, n_runs=int(opts.runs), seed=opts.seed, config=config)
    out = Path(opts.out)
    reporting.write_task_reports([report], out / "report.csv")
    # Persist the run-0 model as the artifact for this invocation.
    result = fit_fold_gnn(data, opts.arch, opts.features, table, seed=opts.seed, run=0, config=config)
    save_model(result.model, out / "model.bin")
    print(f"{report.task} [{report.model}/{report.features}] "
          f"acc={report.mean_accuracy!r} std={report.std_accuracy!r} runs={report.n_runs}")
    print(f"generator={generator}; wrote report.csv and model.bin under {out}")
    return 0


SWEEP_DEFAULTS = dict(
    data=None, out=None, generator=None, task="gt-vs-gen", arch="gcn", features="embedding",
    trials=20, seed=0, epochs=500,
)


def cmd_sweep(args) -> int:
    opts = _merge(args, SWEEP_DEFAULTS)
    _require(opts, "data", "out")
    dataset = _load_data(opts)
    table = _load_table(opts, required=(opts.features == "embedding"))
    opts.seed = int(opts.seed)
    data, generator = _task_data(dataset, table, opts)
    feature_fn = node_feature_fn(opts.features, table)
    split = split_for_run(data, opts.seed, run=0)
    train_set = fold_tensors(data, split.train, feature_fn)
    val_set = fold_tensors(data, split.val, feature_fn)
    result, best = random_search(
        opts.arch, train_set, val_set, n_trials=int(opts.trials), seed=opts.seed, max_epochs=int(opts.epochs)
    )
    out = Path(opts.out)
    reporting.write_sweep(result, out / "sweep.csv")
    best_trial = result.best
    best_cfg = {
        "arch": best_trial.config.arch,
        "hidden_dim": best_trial.config.hidden_dim,
        "n_layers": best_trial.config.n_layers,
        "learning_rate": best_trial.config.learning_rate,
        "dropout": best_trial.config.dropout,
        "weight_decay": best_trial.config.weight_decay,
        "batch_size": best_trial.config.batch_size,
        "val_accuracy": best_trial.val_accuracy,
        "trial": best_trial.index,
    }
    (out / "best_config.json").write_text(json.dumps(best_cfg, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"trials={len(result.trials)} best_trial={best_trial.index} val_accuracy={best_trial.val_accuracy!r}")
    print(f"wrote sweep.csv and best_config.json under {out}")
    return 0


SATURATION_DEFAULTS = dict(
    report=None, out=None, column="accuracy", fractions=None, perms=500, seed=0,
)


def cmd_saturation(args) -> int:
    opts = _merge(args, SATURATION_DEFAULTS)
    _require(opts, "report", "out")
    _, rows = reporting.read_csv(opts.report)
    values = [float(r[opts.column]) for r in rows if r.get("run", "").isdigit()]
    if not values:
        raise CliError(f"{opts.report} holds no per-run rows with column {opts.column!r}")
    fractions = DEFAULT_FRACTIONS if opts.fractions is None else tuple(float(f) for f in _csv_list(opts.fractions))
    points = saturation_curve(values, fractions=fractions, n_perms=int(opts.perms), seed=int(opts.seed))
    out = Path(opts.out)
    reporting.write_saturation(points, out / "saturation.csv")
    print(f"values={len(values)} points={len(points)} final_mean_distance={points[-1].mean_distance!r}")
    print(f"wrote {out / 'saturation.csv'}")
    return 0


REPORT_DEFAULTS = dict(source=None, out=None)


def cmd_report(args) -> int:
    opts = _merge(args, REPORT_DEFAULTS)
    _require(opts, "source")
    out_dir = opts.out or opts.source
    written = reporting.render_figures(opts.source, out_dir)
    if not written:
        raise CliError(f"no known delimited files found under {opts.source}")
    for path in written:
        print(f"rendered {path}")
    return 0


# ----------------------------------------------------------------- argparse


def _add_common(parser: argparse.ArgumentParser, *names: str) -> None:
    parser.add_argument("--config", help="JSON file of option values; flags take precedence")
    spec = {
        "data": dict(help="dataset directory (papers.jsonl, citations.tsv, reflists.jsonl[, embeddings.jsonl])"),
        "out": dict(help="output directory for this run"),
        "seed": dict(type=int, help="root seed (default 0)"),
        "generator": dict(help="generated-list name; defaults to the dataset's only one"),
        "task": dict(help="classification task, e.g. gt-vs-gen or baseline:field-vs-gen:alpha"),
        "features": dict(help="feature kind: structural or embedding"),
        "runs": dict(type=int, help="independent repetitions (re-split + retrain)"),
    }
    for name in names:
        parser.add_argument(f"--{name}", **spec[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="citefp",
        description="Citation-graph fingerprints of machine-generated bibliographies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus with a planted signal")
    _add_common(p, "out", "seed")
    p.add_argument("--focals", type=int, help="number of focal papers")
    p.add_argument("--dim", type=int, help="embedding dimension")
    p.add_argument("--generators", help="comma-separated generated-list names")
    p.add_argument("--baselines", help="comma-separated baseline kinds to append ('' for none)")
    p.add_argument("--drift", type=float, help="off-topic drift of invented references")
    p.add_argument("--share-frac", dest="share_frac", type=float, help="fraction of suggested refs that are real")
    p.add_argument("--isolated-frac", dest="isolated_frac", type=float, help="fraction of invented refs left unwired")
    p.add_argument("--postdate-frac", dest="postdate_frac", type=float, help="invented refs dated after the focal")
    p.add_argument("--missing-meta-frac", dest="missing_meta_frac", type=float, help="refs stripped of paper records")
    p.add_argument("--ref-min", dest="ref_min", type=int, help="minimum references per focal")
    p.add_argument("--ref-max", dest="ref_max", type=int, help="maximum references per focal")
    p.add_argument("--fields", type=int, help="number of top fields")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ingest", help="validate a dataset directory and summarize it")
    _add_common(p, "data", "out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("baseline", help="build shuffle baseline reference lists")
    _add_common(p, "data", "out", "seed")
    p.add_argument("--kind", help="field, subfield, or temporal")
    p.add_argument("--min-subfield-pool", dest="min_subfield_pool", type=int,
                   help="below this pool size a subfield stratum falls back to its field")
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("build-graphs", help="build paired, size-matched citation graphs")
    _add_common(p, "data", "out", "seed", "generator")
    p.add_argument("--raw-sizes", dest="raw_sizes", action="store_const", const=True,
                   help="skip size-matching")
    p.set_defaults(func=cmd_build_graphs)

    p = sub.add_parser("features", help="write structural and embedding-based feature tables")
    _add_common(p, "data", "out", "seed", "generator")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("classify-rf", help="random-forest task with optional controls")
    _add_common(p, "data", "out", "seed", "generator", "task", "features", "runs")
    p.add_argument("--trees", type=int, help="trees per forest")
    p.add_argument("--control", help="none, permuted-labels, or random-vectors")
    p.add_argument("--pca-ks", dest="pca_ks", help="comma-separated ks for the projection ablation")
    p.set_defaults(func=cmd_classify_rf)

    p = sub.add_parser("train-gnn", help="train a message-passing classifier")
    _add_common(p, "data", "out", "seed", "generator", "task", "features", "runs")
    p.add_argument("--arch", help="gcn, sage, gat, or gin")
    p.add_argument("--preset", help="named hyperparameter preset (gt-vs-gen or baseline-vs-gen)")
    p.add_argument("--hidden", type=int, help="hidden width")
    p.add_argument("--layers", type=int, help="message-passing layers (1-4)")
    p.add_argument("--lr", type=float, help="learning rate")
    p.add_argument("--dropout", type=float, help="dropout probability")
    p.add_argument("--weight-decay", dest="weight_decay", type=float, help="decoupled weight decay")
    p.add_argument("--batch", type=int, help="batch size (capped at the fold size)")
    p.add_argument("--epochs", type=int, help="epoch cap")
    p.add_argument("--patience", type=int, help="early-stopping patience")
    p.set_defaults(func=cmd_train_gnn)

    p = sub.add_parser("sweep", help="random hyperparameter search for one architecture")
    _add_common(p, "data", "out", "seed", "generator", "task", "features")
    p.add_argument("--arch", help="gcn, sage, gat, or gin")
    p.add_argument("--trials", type=int, help="number of sampled configurations")
    p.add_argument("--epochs", type=int, help="epoch cap per trial")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("saturation", help="has the per-run metric distribution stabilized?")
    _add_common(p, "out", "seed")
    p.add_argument("--report", help="report.csv with per-run rows")
    p.add_argument("--column", help="metric column (default accuracy)")
    p.add_argument("--fractions", help="comma-separated cumulative fractions")
    p.add_argument("--perms", type=int, help="orderings to average over")
    p.set_defaults(func=cmd_saturation)

    p = sub.add_parser("report", help="render figures for the delimited files in a run directory")
    _add_common(p, "out")
    p.add_argument("--source", help="run directory holding the delimited files")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (CliError, CitefpError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
