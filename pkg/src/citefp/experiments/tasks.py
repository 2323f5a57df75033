"""Classification tasks over paired graphs, with controls.

A task is "<selector>-vs-<selector>" where a selector names a provenance:
``gt``, ``gen`` / ``gen:<name>``, ``baseline`` / ``baseline:<kind>``. The
left class maps to label 0, the right to label 1. Every run re-splits the
focals (stratified by field), retrains from scratch, and scores the test
fold; reports carry per-run metrics plus mean and standard deviation.

Controls probe whether a score could be an artifact: permuted training
labels and random embedding vectors should both land near chance, and
projecting summed embeddings onto all principal components should match
the unprojected score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import seeding
from ..data import BaselineKind, Dataset, EmbeddingTable
from ..errors import InsufficientDataError
from ..forest import RfConfig, evaluate, train_forest
from ..gnn import GnnConfig, accuracy_on, batch_graphs, predict_labels, train
from ..graphs import CitationGraph
from ..semantic import pca, random_vector_table
from .pipeline import PairSet, embedding_sum_matrix, node_feature_fn, structural_matrix
from .splits import SplitPlan, Splits, make_splits

FEATURE_KINDS = ("structural", "embedding")


def selector_label(selector: str, dataset: Dataset) -> str:
    """Resolve a task selector to a provenance label."""
    if selector == "gt":
        return "ground_truth"
    if selector.startswith("gen:"):
        return f"generated:{selector[4:]}"
    if selector == "gen":
        gens = dataset.generators()
        if len(gens) != 1:
            raise ValueError(f"selector 'gen' is ambiguous with generators {list(gens)}; use gen:<name>")
        return f"generated:{gens[0]}"
    if selector.startswith("baseline:"):
        return f"baseline:{BaselineKind.parse(selector[9:]).value}"
    if selector == "baseline":
        kinds = dataset.baseline_kinds()
        if len(kinds) != 1:
            raise ValueError(
                f"selector 'baseline' is ambiguous with kinds {[k.value for k in kinds]}; use baseline:<kind>"
            )
        return f"baseline:{kinds[0].value}"
    raise ValueError(f"unknown selector {selector!r} (expected gt, gen[:name] or baseline[:kind])")


def parse_task(name: str, dataset: Dataset) -> tuple[str, str]:
    """Split "<a>-vs-<b>" into two provenance labels (class 0, class 1)."""
    left, sep, right = name.partition("-vs-")
    if not sep or not left or not right:
        raise ValueError(f"task name {name!r} must look like '<selector>-vs-<selector>'")
    label_a, label_b = selector_label(left, dataset), selector_label(right, dataset)
    if label_a == label_b:
        raise ValueError(f"task {name!r} puts the same provenance on both sides")
    return label_a, label_b


@dataclass(frozen=True)
class TaskData:
    """Aligned per-focal graphs for the two classes of one task."""

    label_a: str
    label_b: str
    focals: tuple[str, ...]
    strata: dict[str, str]
    graphs_a: tuple[CitationGraph, ...]
    graphs_b: tuple[CitationGraph, ...]

    @property
    def name(self) -> str:
        return f"{self.label_a}-vs-{self.label_b}"


def make_task_data(pair_set: PairSet, dataset: Dataset, label_a: str, label_b: str) -> TaskData:
    """Pick, per focal, the two graphs named by the class labels.

    Focals missing either side (e.g. no baseline of the requested kind) are
    left out. Strata come from each focal's top field, ``"unknown"`` when
    the focal has no paper record.
    """
    focals: list[str] = []
    graphs_a: list[CitationGraph] = []
    graphs_b: list[CitationGraph] = []
    for pair in pair_set.pairs:
        by_label = {g.provenance.label: g for g in pair.graphs()}
        ga, gb = by_label.get(label_a), by_label.get(label_b)
        if ga is None or gb is None:
            continue
        focals.append(pair.focal)
        graphs_a.append(ga)
        graphs_b.append(gb)
    if not focals:
        raise InsufficientDataError(f"no focals carry both {label_a!r} and {label_b!r} graphs")
    strata = {}
    for focal in focals:
        rec = dataset.paper(focal)
        strata[focal] = rec.top_field if rec is not None else "unknown"
    return TaskData(
        label_a=label_a,
        label_b=label_b,
        focals=tuple(focals),
        strata=strata,
        graphs_a=tuple(graphs_a),
        graphs_b=tuple(graphs_b),
    )


@dataclass(frozen=True)
class TaskReport:
    """Per-run metrics and their aggregate for one (task, features, model)."""

    task: str
    model: str
    features: str
    accuracies: tuple[float, ...]
    f1_macros: tuple[float, ...]
    fold_sizes: tuple[int, int, int]  # focals per fold in the last run

    @property
    def n_runs(self) -> int:
        return len(self.accuracies)

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.accuracies))

    @property
    def std_accuracy(self) -> float:
        return float(np.std(self.accuracies, ddof=1)) if self.n_runs > 1 else 0.0

    @property
    def mean_f1(self) -> float:
        return float(np.mean(self.f1_macros))

    @property
    def std_f1(self) -> float:
        return float(np.std(self.f1_macros, ddof=1)) if self.n_runs > 1 else 0.0


def split_for_run(
    data: TaskData, seed: int, run: int = 0, fractions: tuple[float, float, float] = (0.70, 0.15, 0.15)
) -> Splits:
    """The exact fold assignment used by run ``run`` of any task runner."""
    plan = SplitPlan(fractions=fractions, seed=seeding.derive(seed, "task", data.name, "split", run))
    return make_splits(data.focals, data.strata, plan)




def _rf_matrices(data: TaskData, features: str, table: EmbeddingTable | None) -> tuple[np.ndarray, np.ndarray]:
    if features == "structural":
        return structural_matrix(data.graphs_a), structural_matrix(data.graphs_b)
    if features == "embedding":
        if table is None:
            raise ValueError("embedding features need an embedding table")
        return embedding_sum_matrix(data.graphs_a, table), embedding_sum_matrix(data.graphs_b, table)
    raise ValueError(f"unknown feature kind {features!r}")


def _fold_rows(split_ids, index: dict[str, int], X_a, X_b) -> tuple[np.ndarray, np.ndarray]:
    rows = [index[f] for f in split_ids]
    X = np.concatenate([X_a[rows], X_b[rows]])
    y = np.concatenate([np.zeros(len(rows), dtype=np.int64), np.ones(len(rows), dtype=np.int64)])
    return X, y


def run_rf_task(
    data: TaskData,
    features: str,
    table: EmbeddingTable | None = None,
    n_runs: int = 10,
    seed: int = 0,
    config: RfConfig = RfConfig(),
    fractions: tuple[float, float, float] = (0.70, 0.15, 0.15),
    permute_labels: bool = False,
    matrices: tuple[np.ndarray, np.ndarray] | None = None,
) -> TaskReport:
    """Random-forest task: train on the train fold, score the test fold.

    ``permute_labels`` shuffles the training labels each run (a chance-level
    control); ``matrices`` lets a caller substitute precomputed per-class
    feature matrices (rows aligned with ``data.focals``).
    """
    X_a, X_b = matrices if matrices is not None else _rf_matrices(data, features, table)
    index = {f: i for i, f in enumerate(data.focals)}
    accs: list[float] = []
    f1s: list[float] = []
    sizes = (0, 0, 0)
    for run in range(n_runs):
        split = split_for_run(data, seed, run, fractions)
        X_train, y_train = _fold_rows(split.train, index, X_a, X_b)
        X_test, y_test = _fold_rows(split.test, index, X_a, X_b)
        if permute_labels:
            rng = seeding.generator(seed, "task", data.name, "permute", run)
            y_train = y_train[rng.permutation(len(y_train))]
        rf_seed = seeding.derive(seed, "task", data.name, features, "rf", run)
        forest = train_forest(X_train, y_train, RfConfig(
            n_trees=config.n_trees,
            bootstrap=config.bootstrap,
            max_features=config.max_features,
            seed=rf_seed,
        ))
        result = evaluate(y_test, forest.predict(X_test))
        accs.append(result.accuracy)
        f1s.append(result.f1_macro)
        sizes = split.sizes
    return TaskReport(
        task=data.name,
        model="rf" if not permute_labels else "rf-permuted",
        features=features,
        accuracies=tuple(accs),
        f1_macros=tuple(f1s),
        fold_sizes=sizes,
    )


def _batch_fold(data: TaskData, split_ids, index, feature_fn):
    graphs = [data.graphs_a[index[f]] for f in split_ids] + [data.graphs_b[index[f]] for f in split_ids]
    labels = [0] * len(split_ids) + [1] * len(split_ids)
    return batch_graphs(graphs, labels, feature_fn)


def _run_config(data: TaskData, arch: str, features: str, input_dim: int, base: "GnnConfig", seed: int, run: int) -> GnnConfig:
    """The per-run config: base hyperparameters plus a run-specific seed."""
    return GnnConfig(
        arch=arch, input_dim=input_dim, hidden_dim=base.hidden_dim, n_layers=base.n_layers,
        learning_rate=base.learning_rate, dropout=base.dropout, weight_decay=base.weight_decay,
        batch_size=base.batch_size, max_epochs=base.max_epochs, patience=base.patience,
        seed=seeding.derive(seed, "task", data.name, features, arch, run),
    )


def run_gnn_task(
    data: TaskData,
    arch: str,
    features: str,
    table: EmbeddingTable | None = None,
    n_runs: int = 5,
    seed: int = 0,
    config: GnnConfig | None = None,
    fractions: tuple[float, float, float] = (0.70, 0.15, 0.15),
) -> TaskReport:
    """Message-passing task: early-stop on the val fold, score the test fold.

    ``config`` supplies the architecture hyperparameters (its ``arch``,
    ``input_dim`` and ``seed`` fields are overridden per run).
    """
    feature_fn = node_feature_fn(features, table)
    input_dim = feature_fn(data.graphs_a[0]).shape[1]
    base = config or GnnConfig(arch=arch, input_dim=input_dim)
    index = {f: i for i, f in enumerate(data.focals)}
    accs: list[float] = []
    f1s: list[float] = []
    sizes = (0, 0, 0)
    for run in range(n_runs):
        split = split_for_run(data, seed, run, fractions)
        train_set = _batch_fold(data, split.train, index, feature_fn)
        val_set = _batch_fold(data, split.val, index, feature_fn)
        test_set = _batch_fold(data, split.test, index, feature_fn)
        cfg = _run_config(data, arch, features, input_dim, base, seed, run)
        result = train(cfg, train_set, val_set)
        accs.append(accuracy_on(result.model, test_set))
        pred = predict_labels(result.model, test_set)
        f1s.append(evaluate(test_set.labels.astype(int), pred).f1_macro)
        sizes = split.sizes
    return TaskReport(
        task=data.name,
        model=arch,
        features=features,
        accuracies=tuple(accs),
        f1_macros=tuple(f1s),
        fold_sizes=sizes,
    )


def fold_tensors(data: TaskData, split_ids, feature_fn):
    """Batched tensors for one fold (class a first, then class b)."""
    index = {f: i for i, f in enumerate(data.focals)}
    return _batch_fold(data, split_ids, index, feature_fn)


def fit_fold_forest(
    data: TaskData,
    features: str,
    table: EmbeddingTable | None,
    seed: int,
    run: int = 0,
    config: RfConfig = RfConfig(),
):
    """Train the forest exactly as run ``run`` of :func:`run_rf_task` does.

    Useful for persisting the model behind a reported score.
    """
    X_a, X_b = _rf_matrices(data, features, table)
    index = {f: i for i, f in enumerate(data.focals)}
    split = split_for_run(data, seed, run)
    X_train, y_train = _fold_rows(split.train, index, X_a, X_b)
    rf_seed = seeding.derive(seed, "task", data.name, features, "rf", run)
    return train_forest(X_train, y_train, RfConfig(
        n_trees=config.n_trees, bootstrap=config.bootstrap,
        max_features=config.max_features, seed=rf_seed,
    ))


def fit_fold_gnn(
    data: TaskData,
    arch: str,
    features: str,
    table: EmbeddingTable | None,
    seed: int,
    run: int = 0,
    config: GnnConfig | None = None,
):
    """Train the network exactly as run ``run`` of :func:`run_gnn_task` does."""
    feature_fn = node_feature_fn(features, table)
    input_dim = feature_fn(data.graphs_a[0]).shape[1]
    base = config or GnnConfig(arch=arch, input_dim=input_dim)
    index = {f: i for i, f in enumerate(data.focals)}
    split = split_for_run(data, seed, run)
    cfg = _run_config(data, arch, features, input_dim, base, seed, run)
    train_set = _batch_fold(data, split.train, index, feature_fn)
    val_set = _batch_fold(data, split.val, index, feature_fn)
    return train(cfg, train_set, val_set)


# ------------------------------------------------------------------ controls


def random_vector_control(
    data: TaskData,
    dim: int,
    n_runs: int = 10,
    seed: int = 0,
    config: RfConfig = RfConfig(),
) -> TaskReport:
    """Embedding task with every vector replaced by a deterministic random one.

    Any score meaningfully above chance here would mean the pipeline leaks
    labels through something other than embedding content.
    """
    ids: set[str] = set()
    for g in list(data.graphs_a) + list(data.graphs_b):
        ids.update(g.nodes)
    table = random_vector_table(sorted(ids), dim=dim, seed=seeding.derive(seed, "control", "random-vector"))
    report = run_rf_task(data, "embedding", table, n_runs=n_runs, seed=seed, config=config)
    return TaskReport(
        task=report.task,
        model="rf-random-vectors",
        features="embedding",
        accuracies=report.accuracies,
        f1_macros=report.f1_macros,
        fold_sizes=report.fold_sizes,
    )


def label_permutation_control(
    data: TaskData,
    features: str,
    table: EmbeddingTable | None = None,
    n_runs: int = 10,
    seed: int = 0,
    config: RfConfig = RfConfig(),
) -> TaskReport:
    """Task with shuffled training labels; test scores should hover at chance."""
    return run_rf_task(data, features, table, n_runs=n_runs, seed=seed, config=config, permute_labels=True)


def pca_k_curve(
    data: TaskData,
    table: EmbeddingTable,
    ks: tuple[int, ...] | None = None,
    n_runs: int = 5,
    seed: int = 0,
    config: RfConfig = RfConfig(),
) -> dict[int, TaskReport]:
    """Embedding task after projecting summed vectors onto top-k components.

    The basis is fit on the pooled class matrices (no labels involved), so
    k equal to the embedding dimension reproduces the unprojected task up to
    an orthogonal change of basis.  Every k reuses the parent task's fold
    seeds, so the curve varies only the representation, never the split.
    """
    X_a, X_b = _rf_matrices(data, "embedding", table)
    dim = X_a.shape[1]
    if ks is None:
        ks = tuple(sorted({k for k in (2, 4, 8, 16, 32, dim) if k <= dim}))
    pooled = np.concatenate([X_a, X_b])
    max_k = min(pooled.shape[0] - 1, dim)
    out: dict[int, TaskReport] = {}
    for k in ks:
        if k < 1 or k > max_k:
            raise ValueError(f"k={k} outside the valid range [1, {max_k}]")
        _, _, projected = pca(pooled, k)
        proj_a, proj_b = projected[: len(X_a)], projected[len(X_a) :]
        report = run_rf_task(
            data, "embedding", table, n_runs=n_runs, seed=seed,
            config=config, matrices=(proj_a, proj_b),
        )
        out[k] = TaskReport(
            task=report.task,
            model=f"rf-pca{k}",
            features="embedding",
            accuracies=report.accuracies,
            f1_macros=report.f1_macros,
            fold_sizes=report.fold_sizes,
        )
    return out


def swap_generator_test(
    data_train: TaskData,
    data_swap: TaskData,
    features: str,
    table: EmbeddingTable | None = None,
    n_runs: int = 10,
    seed: int = 0,
    config: RfConfig = RfConfig(),
    fractions: tuple[float, float, float] = (0.70, 0.15, 0.15),
) -> tuple[TaskReport, int]:
    """Train on one generator's task, score another generator's test pairs.

    Both TaskData objects must share the ground-truth side semantics; test
    focals absent from the swapped-in task are excluded (their count is
    returned alongside the report).
    """
    X_a, X_b = _rf_matrices(data_train, features, table)
    S_a, S_b = _rf_matrices(data_swap, features, table)
    index = {f: i for i, f in enumerate(data_train.focals)}
    swap_index = {f: i for i, f in enumerate(data_swap.focals)}
    accs: list[float] = []
    f1s: list[float] = []
    sizes = (0, 0, 0)
    excluded = 0
    for run in range(n_runs):
        split = split_for_run(data_train, seed, run, fractions)
        X_train, y_train = _fold_rows(split.train, index, X_a, X_b)
        test_ids = [f for f in split.test if f in swap_index]
        excluded = len(split.test) - len(test_ids)
        if not test_ids:
            raise InsufficientDataError("no test focals exist under the swapped-in generator")
        X_test, y_test = _fold_rows(test_ids, swap_index, S_a, S_b)
        rf_seed = seeding.derive(seed, "task", data_train.name, features, "rf", run)
        forest = train_forest(X_train, y_train, RfConfig(
            n_trees=config.n_trees, bootstrap=config.bootstrap,
            max_features=config.max_features, seed=rf_seed,
        ))
        result = evaluate(y_test, forest.predict(X_test))
        accs.append(result.accuracy)
        f1s.append(result.f1_macro)
        sizes = split.sizes
    report = TaskReport(
        task=f"{data_train.name}->swap:{data_swap.label_b}",
        model="rf",
        features=features,
        accuracies=tuple(accs),
        f1_macros=tuple(f1s),
        fold_sizes=sizes,
    )
    return report, excluded


def chance_band(report: TaskReport, low: float = 0.45, high: float = 0.55) -> bool:
    """True when the mean accuracy sits inside the chance band."""
    return low <= report.mean_accuracy <= high


def default_pca_ks(dim: int) -> tuple[int, ...]:
    """Powers of two up to the dimension, plus the dimension itself."""
    ks = [k for k in (2 ** e for e in range(1, int(math.log2(dim)) + 1)) if k < dim]
    return tuple(ks + [dim])
