"""Padded dense batching of citation graphs for the message-passing models.

Graphs are padded to a common node count and stacked, giving per-batch arrays
``feats (G, N, d)``, ``adj (G, N, N)`` and ``node_mask (G, N)``.  Padding
nodes have no edges and are excluded from readout by the mask, so they never
influence a real node.  Architecture-specific propagation operators (the
symmetric-normalized adjacency for GCN, the row-normalized mean operator for
GraphSAGE, the self-looped adjacency for GAT masks and GIN aggregation) are
computed once per set and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import DataFormatError
from ..graphs import CitationGraph

__all__ = ["GraphTensors", "batch_graphs"]


@dataclass
class GraphTensors:
    feats: np.ndarray  # (G, N, d)
    adj: np.ndarray  # (G, N, N)
    node_mask: np.ndarray  # (G, N)
    labels: np.ndarray  # (G,)
    focals: tuple[str, ...]
    _ops: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def n_graphs(self) -> int:
        return self.feats.shape[0]

    @property
    def input_dim(self) -> int:
        return self.feats.shape[2]

    def subset(self, indices: np.ndarray) -> "GraphTensors":
        sub = GraphTensors(
            feats=self.feats[indices],
            adj=self.adj[indices],
            node_mask=self.node_mask[indices],
            labels=self.labels[indices],
            focals=tuple(self.focals[i] for i in indices),
        )
        sub._ops = {name: op[indices] for name, op in self._ops.items()}
        return sub

    def operator(self, arch: str) -> np.ndarray:
        """The constant propagation operator (or mask) for one architecture."""
        if arch not in self._ops:
            if arch == "gcn":
                ahat = self.adj + np.eye(self.adj.shape[1]) * self.node_mask[:, :, None] * self.node_mask[:, None, :]
                deg = ahat.sum(axis=-1)
                dinv = np.divide(1.0, np.sqrt(deg), out=np.zeros_like(deg), where=deg > 0)
                self._ops[arch] = dinv[:, :, None] * ahat * dinv[:, None, :]
            elif arch == "sage":
                deg = self.adj.sum(axis=-1, keepdims=True)
                self._ops[arch] = np.divide(self.adj, deg, out=np.zeros_like(self.adj), where=deg > 0)
            elif arch == "gat":
                ahat = self.adj + np.eye(self.adj.shape[1]) * self.node_mask[:, :, None] * self.node_mask[:, None, :]
                self._ops[arch] = (ahat > 0).astype(np.float64)
            elif arch == "gin":
                eye = np.eye(self.adj.shape[1]) * self.node_mask[:, :, None] * self.node_mask[:, None, :]
                self._ops[arch] = self.adj + eye
            else:
                raise DataFormatError(f"unknown architecture {arch!r}")
        return self._ops[arch]


def batch_graphs(
    graphs: Sequence[CitationGraph],
    labels: Sequence[int],
    node_features: Callable[[CitationGraph], np.ndarray],
) -> GraphTensors:
    """Stack graphs into padded tensors; node order inside each graph is its
    sorted node order, and ``node_features(graph)`` must return one row per
    node in that order."""
    if len(graphs) == 0:
        raise DataFormatError("cannot batch zero graphs")
    if len(labels) != len(graphs):
        raise DataFormatError("labels and graphs must align")
    mats = [np.asarray(node_features(g), dtype=np.float64) for g in graphs]
    dim = mats[0].shape[1]
    for g, m in zip(graphs, mats):
        if m.shape != (g.n_nodes, dim):
            raise DataFormatError(
                f"node features for {g.focal!r} have shape {m.shape}, expected ({g.n_nodes}, {dim})"
            )
        if not np.all(np.isfinite(m)):
            raise DataFormatError(f"node features for {g.focal!r} contain non-finite values")
    n_max = max(g.n_nodes for g in graphs)
    G = len(graphs)
    feats = np.zeros((G, n_max, dim))
    adj = np.zeros((G, n_max, n_max))
    node_mask = np.zeros((G, n_max))
    for i, (g, m) in enumerate(zip(graphs, mats)):
        n = g.n_nodes
        feats[i, :n] = m
        adj[i, :n, :n] = g.adjacency_matrix()
        node_mask[i, :n] = 1.0
    return GraphTensors(
        feats=feats,
        adj=adj,
        node_mask=node_mask,
        labels=np.asarray(labels, dtype=np.int64),
        focals=tuple(g.focal for g in graphs),
    )
