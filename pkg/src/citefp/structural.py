"""Node-level structural descriptors and their graph-level aggregate.

Four per-node metrics, all normalized to be comparable across graph sizes:

* degree centrality ``deg(v) / (|V| - 1)``
* closeness with reachable-fraction scaling,
  ``(|R(v)| / sum d(v, u)) * (|R(v)| / (|V| - 1))`` over the reachable set
  ``R(v)`` (0 when nothing is reachable) — on connected graphs this reduces
  to the classical ``(|V| - 1) / sum d(v, u)``
* eigenvector centrality via shifted power iteration, restricted to the
  dominant component (largest spectral radius; ties go to the component
  containing the lexicographically smallest node key), zero elsewhere
* local clustering ``2 e(v) / (deg(v) (deg(v) - 1))``, zero when ``deg < 2``

The graph-level aggregate summarizes each metric with mean / median / IQR /
max-to-mean and appends edge count, node count, mean degree and the
max-to-mean degree ratio — 20 values per graph.
"""

from __future__ import annotations

from collections import deque
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConvergenceError, DegenerateGraphError
from .graphs import CitationGraph

__all__ = [
    "degree_centrality",
    "closeness_centrality",
    "eigenvector_centrality",
    "clustering_coefficient",
    "aggregate",
    "aggregate_vector",
    "structural_node_features",
    "write_structural_features",
    "AGGREGATE_COLUMNS",
    "NODE_FEATURE_NAMES",
]

_METRICS = ("degree_centrality", "closeness", "eigenvector", "clustering")
_STATS = ("mean", "median", "iqr", "max_to_mean")

AGGREGATE_COLUMNS: tuple[str, ...] = tuple(f"{m}_{s}" for m in _METRICS for s in _STATS) + (
    "edge_count",
    "node_count",
    "mean_degree",
    "degree_max_to_mean",
)

NODE_FEATURE_NAMES: tuple[str, ...] = (
    "degree_centrality",
    "closeness",
    "eigenvector",
    "clustering",
    "edge_count",
)


def _require_size(graph: CitationGraph) -> None:
    if graph.n_nodes < 2:
        raise DegenerateGraphError(f"graph for {graph.focal!r} has fewer than 2 nodes")


def degree_centrality(graph: CitationGraph) -> dict[str, float]:
    """deg(v) / (|V| - 1) per node."""
    _require_size(graph)
    denom = graph.n_nodes - 1
    return {v: graph.degree(v) / denom for v in graph.nodes}


def closeness_centrality(graph: CitationGraph) -> dict[str, float]:
    """Reachability-scaled closeness per node (0 for isolated nodes)."""
    _require_size(graph)
    scale = graph.n_nodes - 1
    out: dict[str, float] = {}
    for v in graph.nodes:
        dist = _bfs_distances(graph, v)
        reachable = len(dist) - 1  # excludes v itself
        if reachable == 0:
            out[v] = 0.0
            continue
        total = sum(dist.values())
        out[v] = (reachable / total) * (reachable / scale)
    return out


def _bfs_distances(graph: CitationGraph, start: str) -> dict[str, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in graph.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def eigenvector_centrality(
    graph: CitationGraph,
    shift: float = 1.0,
    tol: float = 1e-6,
    max_iter: int = 1000,
) -> dict[str, float]:
    """Power-iteration eigenvector centrality on the dominant component.

    Iterates ``x <- (A + shift I) x`` from the uniform vector with unit
    Euclidean normalization each step, stopping when the L1 change between
    successive iterates drops to ``n * tol``.  On disconnected graphs only
    the component with the largest spectral radius carries mass (ties broken
    toward the component containing the smallest node key); every other node
    gets 0.  Raises :class:`ConvergenceError` when ``max_iter`` is exhausted.
    """
    _require_size(graph)
    if shift <= 0:
        raise ValueError("shift must be positive")

    best: tuple[float, str, list[str], np.ndarray] | None = None
    for comp in _components(graph):
        vec, value = _power_iterate(graph, comp, shift, tol, max_iter)
        key = min(comp)
        # Larger spectral radius wins; near-exact ties go to the smaller key.
        if best is None or value > best[0] + 1e-9 * max(1.0, abs(value)) or (
            abs(value - best[0]) <= 1e-9 * max(1.0, abs(value)) and key < best[1]
        ):
            best = (value, key, comp, vec)

    assert best is not None
    out = {v: 0.0 for v in graph.nodes}
    _, _, comp, vec = best
    for v, x in zip(comp, vec):
        out[v] = float(x)
    return out


def _components(graph: CitationGraph) -> list[list[str]]:
    seen: set[str] = set()
    comps: list[list[str]] = []
    for v in graph.nodes:
        if v in seen:
            continue
        comp = sorted(_bfs_distances(graph, v))
        seen.update(comp)
        comps.append(comp)
    return comps


def _power_iterate(
    graph: CitationGraph, comp: list[str], shift: float, tol: float, max_iter: int
) -> tuple[np.ndarray, float]:
    n = len(comp)
    index = {v: i for i, v in enumerate(comp)}
    mat = np.zeros((n, n))
    for v in comp:
        i = index[v]
        for u in graph.neighbors(v):
            mat[i, index[u]] = 1.0
    x = np.full(n, 1.0 / np.sqrt(n))
    for _ in range(max_iter):
        nxt = mat @ x + shift * x
        nxt /= np.linalg.norm(nxt)
        if np.abs(nxt - x).sum() <= n * tol:
            return nxt, float(nxt @ mat @ nxt)
        x = nxt
    raise ConvergenceError(
        f"eigenvector centrality did not converge in {max_iter} iterations "
        f"(component of {comp[0]!r}, tol={tol})"
    )


def clustering_coefficient(graph: CitationGraph) -> dict[str, float]:
    """2 e(v) / (deg(v) (deg(v) - 1)) per node, 0 when deg(v) < 2."""
    _require_size(graph)
    out: dict[str, float] = {}
    for v in graph.nodes:
        neigh = graph.neighbors(v)
        d = len(neigh)
        if d < 2:
            out[v] = 0.0
            continue
        links = sum(1 for u in neigh for w in graph.neighbors(u) if w in neigh) // 2
        out[v] = 2.0 * links / (d * (d - 1))
    return out


# ------------------------------------------------------------------ aggregate


def _summary(values: np.ndarray) -> tuple[float, float, float, float]:
    mean = float(values.mean())
    median = float(np.median(values))
    q1, q3 = np.percentile(values, [25.0, 75.0])
    ratio = float(values.max() / mean) if mean > 0 else 0.0
    return mean, median, float(q3 - q1), ratio


def aggregate(graph: CitationGraph) -> dict[str, float]:
    """The 20-value structural summary, keyed by :data:`AGGREGATE_COLUMNS`."""
    _require_size(graph)
    metric_values = (
        degree_centrality(graph),
        closeness_centrality(graph),
        eigenvector_centrality(graph),
        clustering_coefficient(graph),
    )
    out: dict[str, float] = {}
    for name, per_node in zip(_METRICS, metric_values):
        vals = np.array([per_node[v] for v in graph.nodes])
        for stat, value in zip(_STATS, _summary(vals)):
            out[f"{name}_{stat}"] = value
    degrees = graph.degrees().astype(np.float64)
    mean_degree = float(degrees.mean())
    out["edge_count"] = float(graph.n_edges)
    out["node_count"] = float(graph.n_nodes)
    out["mean_degree"] = mean_degree
    out["degree_max_to_mean"] = float(degrees.max() / mean_degree) if mean_degree > 0 else 0.0
    return out


def aggregate_vector(graph: CitationGraph) -> np.ndarray:
    """:func:`aggregate` as a float64 vector in column order."""
    agg = aggregate(graph)
    return np.array([agg[c] for c in AGGREGATE_COLUMNS])


def structural_node_features(graph: CitationGraph) -> np.ndarray:
    """Per-node feature matrix (n, 5): the four metrics plus total edge count."""
    metrics = (
        degree_centrality(graph),
        closeness_centrality(graph),
        eigenvector_centrality(graph),
        clustering_coefficient(graph),
    )
    rows = [[m[v] for m in metrics] + [float(graph.n_edges)] for v in graph.nodes]
    return np.array(rows, dtype=np.float64)


def write_structural_features(graphs: Iterable[CitationGraph], path: str | Path) -> int:
    """Write one aggregate row per graph to ``path`` (CSV); returns row count."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("focal_id,provenance," + ",".join(AGGREGATE_COLUMNS) + "\n")
        for g in graphs:
            agg = aggregate(g)
            cells = [g.focal, g.provenance.label] + [repr(agg[c]) for c in AGGREGATE_COLUMNS]
            fh.write(",".join(cells) + "\n")
            n += 1
    return n
