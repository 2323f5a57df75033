"""Embedding-based graph features and alignment diagnostics.

A graph's semantic profile is built from one vector per paper (section
``embeddings.jsonl`` of a dataset): the focal vector, the per-reference
vectors, and their sum.  Alignment diagnostics measure how tightly the
bibliography clusters around the focal topic:

* mean focal-to-reference cosine / Euclidean distance
* mean reference-to-reference cosine / Euclidean distance over distinct
  unordered reference pairs (the focal is excluded)
* focal-to-reference-sum cosine / Euclidean distance

Cosine against a zero-norm vector is defined as 0.  Pair means over fewer
than two references are undefined and reported as ``None``.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from . import seeding
from .data import EmbeddingTable, NodeCategory
from .errors import DataFormatError, MissingEmbeddingError
from .graphs import CitationGraph

__all__ = [
    "cosine",
    "GraphEmbedding",
    "graph_embedding",
    "AlignmentDiagnostics",
    "alignment",
    "pca",
    "isolated_node_similarity",
    "random_vector_table",
    "write_semantic_features",
    "write_graph_embeddings",
    "read_graph_embeddings",
    "SEMANTIC_COLUMNS",
]

SEMANTIC_COLUMNS: tuple[str, ...] = (
    "focal_ref_cosine_mean",
    "ref_ref_cosine_mean",
    "focal_refsum_cosine",
    "focal_ref_euclidean_mean",
    "ref_ref_euclidean_mean",
    "focal_refsum_euclidean",
    "coverage",
)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity, 0.0 when either vector has zero norm."""
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class GraphEmbedding:
    """Embedding view of one graph: focal vector, reference rows, their sum.

    ``ref_ids`` lists the references that actually have vectors (sorted);
    ``coverage`` is that count over the total reference count.
    """

    focal: str
    provenance: str
    focal_vec: np.ndarray
    ref_ids: tuple[str, ...]
    ref_matrix: np.ndarray  # (len(ref_ids), dim)
    coverage: float

    @property
    def ref_sum(self) -> np.ndarray:
        if self.ref_matrix.shape[0] == 0:
            return np.zeros_like(self.focal_vec)
        return self.ref_matrix.sum(axis=0)


def graph_embedding(graph: CitationGraph, table: EmbeddingTable) -> GraphEmbedding:
    """Collect the focal and reference vectors for a graph.

    The focal vector is required (:class:`MissingEmbeddingError` otherwise);
    references without vectors are skipped and reflected in ``coverage``.
    """
    focal_vec = table.vector(graph.focal)
    refs = graph.reference_nodes
    embedded = tuple(r for r in refs if r in table)
    matrix = table.matrix(embedded)
    coverage = len(embedded) / len(refs) if refs else 0.0
    return GraphEmbedding(
        focal=graph.focal,
        provenance=graph.provenance.label,
        focal_vec=focal_vec,
        ref_ids=embedded,
        ref_matrix=matrix,
        coverage=coverage,
    )


@dataclass(frozen=True)
class AlignmentDiagnostics:
    focal_ref_cosine_mean: float | None
    ref_ref_cosine_mean: float | None
    focal_refsum_cosine: float | None
    focal_ref_euclidean_mean: float | None
    ref_ref_euclidean_mean: float | None
    focal_refsum_euclidean: float | None

    def as_dict(self) -> dict[str, float | None]:
        return {
            "focal_ref_cosine_mean": self.focal_ref_cosine_mean,
            "ref_ref_cosine_mean": self.ref_ref_cosine_mean,
            "focal_refsum_cosine": self.focal_refsum_cosine,
            "focal_ref_euclidean_mean": self.focal_ref_euclidean_mean,
            "ref_ref_euclidean_mean": self.ref_ref_euclidean_mean,
            "focal_refsum_euclidean": self.focal_refsum_euclidean,
        }


def alignment(embedding: GraphEmbedding) -> AlignmentDiagnostics:
    """The six alignment diagnostics for one graph embedding."""
    f = embedding.focal_vec
    refs = embedding.ref_matrix
    n = refs.shape[0]

    if n == 0:
        return AlignmentDiagnostics(None, None, None, None, None, None)

    focal_cos = float(np.mean([cosine(f, refs[i]) for i in range(n)]))
    focal_eu = float(np.mean(np.linalg.norm(refs - f, axis=1)))
    s = embedding.ref_sum
    sum_cos = cosine(f, s)
    sum_eu = float(np.linalg.norm(f - s))

    if n < 2:
        return AlignmentDiagnostics(focal_cos, None, sum_cos, focal_eu, None, sum_eu)

    cos_vals, eu_vals = [], []
    for i in range(n):
        for j in range(i + 1, n):
            cos_vals.append(cosine(refs[i], refs[j]))
            eu_vals.append(float(np.linalg.norm(refs[i] - refs[j])))
    return AlignmentDiagnostics(
        focal_ref_cosine_mean=focal_cos,
        ref_ref_cosine_mean=float(np.mean(cos_vals)),
        focal_refsum_cosine=sum_cos,
        focal_ref_euclidean_mean=focal_eu,
        ref_ref_euclidean_mean=float(np.mean(eu_vals)),
        focal_refsum_euclidean=sum_eu,
    )


def pca(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Principal components of ``matrix`` (n, d) via SVD of the centered data.

    Returns ``(components, explained_variance_ratio, projected)`` with shapes
    ``(k, d)``, ``(k,)`` and ``(n, k)``.  Requires ``n >= 2`` and
    ``k <= min(n - 1, d)``.  Component signs are fixed so each component's
    largest-magnitude coordinate is positive, making results reproducible.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2:
        raise ValueError("pca requires a 2-D matrix with at least 2 rows")
    n, d = matrix.shape
    if not (1 <= k <= min(n - 1, d)):
        raise ValueError(f"k must lie in [1, min(n - 1, d)] = [1, {min(n - 1, d)}], got {k}")
    centered = matrix - matrix.mean(axis=0)
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    signs = np.sign(vt[np.arange(vt.shape[0]), np.argmax(np.abs(vt), axis=1)])
    signs[signs == 0] = 1.0
    vt = vt * signs[:, None]
    variances = svals**2
    total = variances.sum()
    ratio = variances[:k] / total if total > 0 else np.zeros(k)
    components = vt[:k]
    projected = centered @ components.T
    return components, ratio, projected


def isolated_node_similarity(graph: CitationGraph, table: EmbeddingTable) -> dict[NodeCategory, list[float]]:
    """Mean cosine of each embedded reference against all other embedded nodes.

    The comparison set includes the focal.  Scores are grouped by the node's
    category, so generated-isolated references can be compared against shared
    and generated-connected ones (and, for baseline graphs, against the
    reassigned references).
    """
    embedded = [v for v in graph.nodes if v in table]
    vectors = {v: table.vector(v) for v in embedded}
    out: dict[NodeCategory, list[float]] = {}
    if len(embedded) < 2:
        return out
    for v in embedded:
        if v == graph.focal:
            continue
        scores = [cosine(vectors[v], vectors[u]) for u in embedded if u != v]
        out.setdefault(graph.categories[v], []).append(float(np.mean(scores)))
    return out


def random_vector_table(ids: Iterable[str], dim: int, seed: int) -> EmbeddingTable:
    """Standard-normal control vectors, deterministic per ``(id, seed)``.

    Each id's vector depends only on the id and the seed — not on the order
    or number of ids requested — so control tables are stable across runs.
    """
    vectors = {pid: seeding.generator(seed, "random-vector", pid).standard_normal(dim) for pid in set(ids)}
    return EmbeddingTable(vectors, dim)


# ----------------------------------------------------------------- file I/O


def _fmt(value: float | None) -> str:
    return "" if value is None else repr(float(value))


def write_semantic_features(
    graphs: Iterable[CitationGraph], table: EmbeddingTable, path: str | Path
) -> int:
    """One alignment row per graph; undefined diagnostics become empty cells."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("focal_id,provenance," + ",".join(SEMANTIC_COLUMNS) + "\n")
        for g in graphs:
            emb = graph_embedding(g, table)
            diag = alignment(emb).as_dict()
            cells = [g.focal, g.provenance.label]
            cells += [_fmt(diag[c]) for c in SEMANTIC_COLUMNS[:-1]]
            cells.append(repr(float(emb.coverage)))
            fh.write(",".join(cells) + "\n")
            n += 1
    return n


def write_graph_embeddings(
    rows: Sequence[tuple[str, np.ndarray]], dim: int, path: str | Path
) -> None:
    """Write graph-level vectors: a JSON header line, then float32 LE rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    order = [focal for focal, _ in rows]
    header = json.dumps({"dim": int(dim), "count": len(rows), "order": order}, sort_keys=True)
    with open(path, "wb") as fh:
        fh.write(header.encode("utf-8") + b"\n")
        for focal, vec in rows:
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise DataFormatError(f"graph vector for {focal!r} has shape {vec.shape}, expected ({dim},)")
            fh.write(struct.pack(f"<{dim}f", *vec.astype(np.float32)))


def read_graph_embeddings(path: str | Path) -> tuple[list[str], np.ndarray]:
    """Read back a graph-embedding file; returns (order, float32 matrix)."""
    path = Path(path)
    with open(path, "rb") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            dim, count, order = int(header["dim"]), int(header["count"]), list(header["order"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataFormatError(f"{path.name}: bad graph-embedding header ({exc})") from None
        blob = fh.read()
    expected = count * dim * 4
    if len(blob) != expected or len(order) != count:
        raise DataFormatError(f"{path.name}: expected {count} rows of {dim} float32 values")
    matrix = np.frombuffer(blob, dtype="<f4").reshape(count, dim)
    return order, matrix
