"""From a dataset to paired, size-matched graphs and feature matrices.

``build_pairs`` is the canonical preparation step shared by the CLI and the
experiment runners: build each focal's full annotated graph, split it into
its ground-truth and generated halves, attach baseline graphs, drop focals
whose generated list has no resolvable reference at all, and size-match
every graph in a pair to the generated reference count.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..data import BaselineKind, Dataset, EmbeddingTable, NodeCategory, Provenance
from ..errors import InsufficientDataError
from ..graphs import CitationGraph, GraphPair, build_full_graph, build_reference_graph, size_match, split_graph
from ..semantic import graph_embedding
from ..structural import aggregate_vector, structural_node_features


@dataclass(frozen=True)
class PairSet:
    """All graph pairs for one generator, plus the focals that were dropped.

    ``dropped`` lists focals excluded because no generated reference resolved
    to a paper record; ``skipped`` lists focals that lacked one of the two
    reference lists and were never paired.
    """

    generator: str
    pairs: tuple[GraphPair, ...]
    dropped: tuple[str, ...] = ()
    skipped: tuple[str, ...] = ()

    @property
    def focals(self) -> tuple[str, ...]:
        return tuple(p.focal for p in self.pairs)


def build_pairs(
    dataset: Dataset,
    generator: str,
    baseline_kinds: tuple[BaselineKind | str, ...] | None = None,
    seed: int = 0,
    size_matched: bool = True,
) -> PairSet:
    """Assemble ground-truth/generated/baseline graph pairs for every focal.

    ``baseline_kinds`` defaults to every kind present in the dataset; pass an
    empty tuple to skip baselines. Pairs come back sorted by focal id.
    """
    if baseline_kinds is None:
        baseline_kinds = dataset.baseline_kinds()
    kinds = tuple(k if isinstance(k, BaselineKind) else BaselineKind.parse(k) for k in baseline_kinds)

    pairs: list[GraphPair] = []
    dropped: list[str] = []
    skipped: list[str] = []
    for focal in dataset.focal_ids("ground_truth"):
        gt = dataset.ground_truth_list(focal)
        gen = dataset.generated_list(focal, generator)
        if gt is None or gen is None:
            skipped.append(focal)
            continue
        resolvable = sum(1 for r in gen.refs if r in dataset.papers)
        if resolvable == 0:
            dropped.append(focal)
            continue
        full = build_full_graph(focal, gt.refs, gen.refs, dataset.edges, generator=generator)
        pair = split_graph(full)
        baselines: list[CitationGraph] = []
        for kind in kinds:
            lst = dataset.baseline_list(focal, kind)
            if lst is not None:
                baselines.append(
                    build_reference_graph(focal, lst.refs, dataset.edges, Provenance.baseline(kind))
                )
        pair = replace(pair, baselines=tuple(baselines), generated_resolvable=resolvable)
        if size_matched:
            pair = size_match(pair, seed)
        pairs.append(pair)

    if not pairs:
        raise InsufficientDataError(f"no usable focal papers for generator {generator!r}")
    return PairSet(generator=generator, pairs=tuple(pairs), dropped=tuple(dropped), skipped=tuple(skipped))


def graphs_by_provenance(pairs: PairSet) -> dict[str, tuple[CitationGraph, ...]]:
    """Group every graph in the pair set under its provenance label."""
    out: dict[str, list[CitationGraph]] = {}
    for pair in pairs.pairs:
        for g in pair.graphs():
            out.setdefault(g.provenance.label, []).append(g)
    return {label: tuple(gs) for label, gs in sorted(out.items())}


# ------------------------------------------------- feature materialization


def structural_matrix(graphs) -> np.ndarray:
    """Stack the 20-column structural aggregate for each graph."""
    return np.stack([aggregate_vector(g) for g in graphs])


def embedding_sum_matrix(graphs, table: EmbeddingTable) -> np.ndarray:
    """Stack the summed reference-embedding vector for each graph."""
    return np.stack([graph_embedding(g, table).ref_sum for g in graphs])


def node_feature_fn(features: str, table: EmbeddingTable | None = None):
    """Per-graph node feature builder for the message-passing models.

    ``features`` is ``"structural"`` (five per-node graph statistics) or
    ``"embedding"`` (each node's embedding vector; missing vectors become
    zeros). The returned callable maps a graph to an (n_nodes, d) array in
    node order.
    """
    if features == "structural":
        return structural_node_features
    if features == "embedding":
        if table is None:
            raise ValueError("embedding node features need an embedding table")

        def _embed(graph: CitationGraph) -> np.ndarray:
            rows = []
            for v in graph.nodes:
                vec = table.get(v)
                rows.append(np.zeros(table.dim) if vec is None else vec)
            return np.stack(rows)

        return _embed
    raise ValueError(f"unknown node feature kind {features!r}")


def isolated_share(graph: CitationGraph) -> float:
    """Fraction of reference nodes labeled isolated (degree one in the full graph)."""
    refs = graph.reference_nodes
    if not refs:
        return 0.0
    iso = sum(1 for v in refs if graph.categories[v] is NodeCategory.GENERATED_ISOLATED)
    return iso / len(refs)
