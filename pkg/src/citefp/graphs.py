"""Building, splitting and size-matching citation graphs.

Each focal paper yields a small undirected simple graph: the focal node, its
listed references, the focal-to-reference edges (always present, since
listing a reference is itself a citation) and whatever reference-to-reference
citation edges exist in the dataset's edge set.

The *full* graph for a focal unions the ground-truth and generated reference
lists and labels every node with a :class:`~citefp.data.NodeCategory`:
``shared`` (in both lists), ``ground_truth_only``, and generated-only nodes
split into ``generated_connected`` / ``generated_isolated`` by whether they
touch anything besides the focal.  :func:`split_graph` then projects the full
graph back into its ground-truth and generated halves with categories intact.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import seeding
from .data import CitationEdgeSet, NodeCategory, Provenance
from .errors import DataFormatError, DegenerateGraphError

__all__ = [
    "CitationGraph",
    "GraphPair",
    "build_full_graph",
    "build_reference_graph",
    "split_graph",
    "size_match",
    "undirected_simple",
    "write_graphs",
    "read_graphs",
]


def _canonical_edge(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class CitationGraph:
    """An undirected simple graph around one focal paper.

    ``nodes`` is sorted and includes the focal; ``edges`` holds canonical
    ``(min, max)`` pairs.  Construction validates that the graph is simple,
    that categories cover exactly the node set, and that the focal is present
    with degree at least one.
    """

    focal: str
    nodes: tuple[str, ...]
    edges: frozenset[tuple[str, str]]
    categories: Mapping[str, NodeCategory]
    provenance: Provenance
    _adjacency: Mapping[str, frozenset[str]] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        node_set = set(self.nodes)
        if len(node_set) != len(self.nodes):
            raise DegenerateGraphError(f"graph for {self.focal!r} repeats node ids")
        if self.focal not in node_set:
            raise DegenerateGraphError(f"focal {self.focal!r} missing from its own graph")
        object.__setattr__(self, "nodes", tuple(sorted(self.nodes)))
        adj: dict[str, set[str]] = {v: set() for v in self.nodes}
        for a, b in self.edges:
            if a == b:
                raise DegenerateGraphError(f"graph for {self.focal!r} has a self-loop at {a!r}")
            if a not in node_set or b not in node_set:
                raise DegenerateGraphError(f"graph for {self.focal!r} has edge ({a!r}, {b!r}) outside its node set")
            if (a, b) != _canonical_edge(a, b):
                raise DegenerateGraphError(f"edge ({a!r}, {b!r}) is not in canonical (min, max) order")
            adj[a].add(b)
            adj[b].add(a)
        if set(self.categories) != node_set:
            raise DegenerateGraphError(f"categories for {self.focal!r} do not cover exactly the node set")
        if self.categories[self.focal] is not NodeCategory.FOCAL:
            raise DegenerateGraphError(f"focal {self.focal!r} must carry the focal category")
        if sum(1 for c in self.categories.values() if c is NodeCategory.FOCAL) != 1:
            raise DegenerateGraphError(f"graph for {self.focal!r} must have exactly one focal node")
        if not adj[self.focal]:
            raise DegenerateGraphError(f"focal {self.focal!r} has degree 0")
        object.__setattr__(self, "_adjacency", {v: frozenset(s) for v, s in adj.items()})

    # --- basic accessors ------------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def reference_nodes(self) -> tuple[str, ...]:
        return tuple(v for v in self.nodes if v != self.focal)

    def neighbors(self, v: str) -> frozenset[str]:
        return self._adjacency[v]

    def degree(self, v: str) -> int:
        return len(self._adjacency[v])

    def degrees(self) -> np.ndarray:
        """Degree per node, in node order."""
        return np.array([len(self._adjacency[v]) for v in self.nodes], dtype=np.int64)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense symmetric 0/1 matrix in node order."""
        index = {v: i for i, v in enumerate(self.nodes)}
        mat = np.zeros((self.n_nodes, self.n_nodes), dtype=np.float64)
        for a, b in self.edges:
            i, j = index[a], index[b]
            mat[i, j] = mat[j, i] = 1.0
        return mat

    def induced(self, keep: Iterable[str], provenance: Provenance | None = None) -> "CitationGraph":
        """Subgraph on ``keep`` (must include the focal), categories restricted."""
        keep_set = set(keep)
        if self.focal not in keep_set:
            raise DegenerateGraphError(f"induced subgraph must retain the focal {self.focal!r}")
        return CitationGraph(
            focal=self.focal,
            nodes=tuple(sorted(keep_set)),
            edges=frozenset(e for e in self.edges if e[0] in keep_set and e[1] in keep_set),
            categories={v: c for v, c in self.categories.items() if v in keep_set},
            provenance=provenance or self.provenance,
        )

    def nodes_in(self, *cats: NodeCategory) -> tuple[str, ...]:
        wanted = set(cats)
        return tuple(v for v in self.nodes if self.categories[v] in wanted)


def undirected_simple(graph: CitationGraph) -> bool:
    """True iff the graph has no self-loops, no parallel edges and symmetric adjacency."""
    seen: set[tuple[str, str]] = set()
    for a, b in graph.edges:
        if a == b or (a, b) in seen:
            return False
        seen.add((a, b))
    for v in graph.nodes:
        for u in graph.neighbors(v):
            if v not in graph.neighbors(u):
                return False
    return True


# ------------------------------------------------------------- construction


def _reference_edges(focal: str, refs: Sequence[str], edge_set: CitationEdgeSet) -> set[tuple[str, str]]:
    edges = {_canonical_edge(focal, r) for r in refs}
    ref_list = sorted(set(refs))
    for i, a in enumerate(ref_list):
        neigh = edge_set.undirected_neighbors(a)
        for b in ref_list[i + 1 :]:
            if b in neigh:
                edges.add(_canonical_edge(a, b))
    return edges


def build_full_graph(
    focal: str,
    gt_refs: Sequence[str],
    gen_refs: Sequence[str],
    edge_set: CitationEdgeSet,
    generator: str = "generated",
) -> CitationGraph:
    """Build the annotated union graph for one focal paper.

    The focal is adjacent to every listed reference; reference-to-reference
    edges come from ``edge_set``.  Generated-only references are labeled
    isolated when their only edge is the focal one.
    """
    gt_set, gen_set = set(gt_refs), set(gen_refs)
    if focal in gt_set or focal in gen_set:
        raise DegenerateGraphError(f"focal {focal!r} appears in its own reference lists")
    union = gt_set | gen_set
    if not union:
        raise DegenerateGraphError(f"focal {focal!r} has no references in either list")
    nodes = tuple(sorted(union | {focal}))
    edges = _reference_edges(focal, sorted(union), edge_set)

    adj_count: dict[str, int] = {v: 0 for v in nodes}
    for a, b in edges:
        adj_count[a] += 1
        adj_count[b] += 1

    categories: dict[str, NodeCategory] = {focal: NodeCategory.FOCAL}
    for r in union:
        if r in gt_set and r in gen_set:
            categories[r] = NodeCategory.SHARED
        elif r in gt_set:
            categories[r] = NodeCategory.GROUND_TRUTH_ONLY
        elif adj_count[r] <= 1:
            categories[r] = NodeCategory.GENERATED_ISOLATED
        else:
            categories[r] = NodeCategory.GENERATED_CONNECTED

    return CitationGraph(
        focal=focal,
        nodes=nodes,
        edges=frozenset(edges),
        categories=categories,
        provenance=Provenance.full(generator),
    )


def build_reference_graph(
    focal: str,
    refs: Sequence[str],
    edge_set: CitationEdgeSet,
    provenance: Provenance,
    category: NodeCategory = NodeCategory.GROUND_TRUTH_ONLY,
) -> CitationGraph:
    """Graph for a single reference list (used for baseline lists).

    Baseline references are real ground-truth references reassigned to a new
    focal, so they carry the ``ground_truth_only`` category by default.
    """
    ref_set = set(refs)
    if focal in ref_set:
        raise DegenerateGraphError(f"focal {focal!r} appears in its own reference list")
    if not ref_set:
        raise DegenerateGraphError(f"focal {focal!r} has an empty reference list")
    nodes = tuple(sorted(ref_set | {focal}))
    categories = {v: category for v in nodes}
    categories[focal] = NodeCategory.FOCAL
    return CitationGraph(
        focal=focal,
        nodes=nodes,
        edges=frozenset(_reference_edges(focal, sorted(ref_set), edge_set)),
        categories=categories,
        provenance=provenance,
    )


@dataclass(frozen=True)
class GraphPair:
    """The per-focal bundle: full graph, its two halves, and any baselines.

    ``generated_resolvable`` counts generated references backed by a paper
    record; pairs where it is zero are dropped from paired analyses.
    ``notes`` records anomalies such as a generated list larger than the
    ground-truth one (in which case size-matching trims the generated side).
    """

    focal: str
    generator: str
    full: CitationGraph
    ground_truth: CitationGraph
    generated: CitationGraph
    baselines: tuple[CitationGraph, ...] = ()
    generated_resolvable: int | None = None
    notes: tuple[str, ...] = ()

    def graphs(self) -> tuple[CitationGraph, ...]:
        return (self.ground_truth, self.generated) + self.baselines

    def baseline(self, kind) -> CitationGraph | None:
        for g in self.baselines:
            if g.provenance.kind == "baseline" and g.provenance.name == getattr(kind, "value", kind):
                return g
        return None


def split_graph(full: CitationGraph) -> GraphPair:
    """Project a full graph into its ground-truth and generated halves.

    Node categories are preserved; each half keeps the induced edges.
    """
    if full.provenance.kind != "full":
        raise DegenerateGraphError(f"split expects a full graph, got provenance {full.provenance.label!r}")
    generator = full.provenance.name or "generated"
    gt_nodes = {full.focal, *full.nodes_in(NodeCategory.SHARED, NodeCategory.GROUND_TRUTH_ONLY)}
    gen_nodes = {
        full.focal,
        *full.nodes_in(NodeCategory.SHARED, NodeCategory.GENERATED_CONNECTED, NodeCategory.GENERATED_ISOLATED),
    }
    if len(gt_nodes) < 2:
        raise DegenerateGraphError(f"focal {full.focal!r} has no ground-truth references to split out")
    if len(gen_nodes) < 2:
        raise DegenerateGraphError(f"focal {full.focal!r} has no generated references to split out")
    return GraphPair(
        focal=full.focal,
        generator=generator,
        full=full,
        ground_truth=full.induced(gt_nodes, Provenance.ground_truth()),
        generated=full.induced(gen_nodes, Provenance.generated(generator)),
    )


def size_match(pair: GraphPair, seed: int) -> GraphPair:
    """Trim reference nodes so every graph in the pair matches the generated count.

    Removal is uniform without replacement, keyed only by ``(seed, focal,
    provenance)`` so the choice is fixed once per pair and identical across
    runs.  When the generated side is the largest, it is trimmed down to the
    ground-truth count instead and a note is recorded.  Idempotent: matched
    pairs pass through unchanged.
    """
    target = len(pair.generated.reference_nodes)
    gt_count = len(pair.ground_truth.reference_nodes)
    notes = list(pair.notes)
    generated = pair.generated
    if target > gt_count:
        generated = _trim(pair.generated, gt_count, seed, pair.focal)
        target = gt_count
        if "generated_trimmed_to_ground_truth" not in notes:
            notes.append("generated_trimmed_to_ground_truth")
    ground_truth = _trim(pair.ground_truth, target, seed, pair.focal)
    baselines = tuple(_trim(g, target, seed, pair.focal) for g in pair.baselines)
    return replace(pair, ground_truth=ground_truth, generated=generated, baselines=baselines, notes=tuple(notes))


def _trim(graph: CitationGraph, target: int, seed: int, focal: str) -> CitationGraph:
    refs = graph.reference_nodes
    if len(refs) <= target:
        return graph
    rng = seeding.generator(seed, "size-match", focal, graph.provenance.label)
    keep = rng.choice(len(refs), size=target, replace=False)
    return graph.induced({focal, *(refs[i] for i in sorted(keep))})


# ----------------------------------------------------------------- file I/O


def write_graphs(graphs: Iterable[CitationGraph], path: str | Path) -> int:
    """Write graphs as JSON lines; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for g in graphs:
            record = {
                "focal": g.focal,
                "provenance": g.provenance.label,
                "nodes": list(g.nodes),
                "categories": {v: g.categories[v].label for v in g.nodes},
                "edges": sorted([a, b] for a, b in g.edges),
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")
            n += 1
    return n


def read_graphs(path: str | Path) -> Iterator[CitationGraph]:
    """Stream graphs back from a JSON-lines file written by :func:`write_graphs`."""
    path = Path(path)
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                yield CitationGraph(
                    focal=obj["focal"],
                    nodes=tuple(obj["nodes"]),
                    edges=frozenset(_canonical_edge(a, b) for a, b in obj["edges"]),
                    categories={v: NodeCategory.parse(c) for v, c in obj["categories"].items()},
                    provenance=Provenance.parse(obj["provenance"]),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DataFormatError(f"{path.name}:{lineno}: bad graph record ({exc})") from None
