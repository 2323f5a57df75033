"""Reference implementations used to cross-check the library under test.

Everything here recomputes a quantity by a *different* route than the package
does — dense linear algebra instead of power iteration, Floyd–Warshall-style
path growth instead of per-source BFS, third-party libraries where a trusted
one exists — so a shared bug between test and implementation is unlikely.
"""

from __future__ import annotations

import math

import networkx as nx
import numpy as np
from scipy import stats as sstats
from sklearn.metrics import accuracy_score, f1_score

from citefp.graphs import CitationGraph

# ---------------------------------------------------------------------------
# graph metrics


def to_networkx(graph: CitationGraph) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(graph.nodes)
    g.add_edges_from(graph.edges)
    return g


def degree_oracle(graph: CitationGraph) -> dict[str, float]:
    return nx.degree_centrality(to_networkx(graph))


def closeness_oracle(graph: CitationGraph) -> dict[str, float]:
    # wf_improved scales by the reachable share, matching the documented
    # convention for disconnected graphs (isolated node -> 0).
    return nx.closeness_centrality(to_networkx(graph), wf_improved=True)


def clustering_oracle(graph: CitationGraph) -> dict[str, float]:
    return nx.clustering(to_networkx(graph))


def eigenvector_oracle(graph: CitationGraph, shift: float = 1.0) -> dict[str, float]:
    """Dense (A + shift*I) eigenvector of the dominant component via eigh.

    The dominant component is the one whose top eigenvalue is largest, with a
    1e-9 relative tie broken toward the component containing the smallest node
    key; all other nodes get 0.  The returned vector is unit L2 and
    non-negative (Perron orientation).
    """
    g = to_networkx(graph)
    nodes = list(graph.nodes)
    best: tuple[float, str, np.ndarray, list[str]] | None = None
    for comp in nx.connected_components(g):
        members = sorted(comp)
        n = len(members)
        a = np.zeros((n, n))
        for i, u in enumerate(members):
            for v in g.neighbors(u):
                a[i, members.index(v)] = 1.0
        a += shift * np.eye(n)
        vals, vecs = np.linalg.eigh(a)
        lam = float(vals[-1])
        vec = vecs[:, -1]
        if vec.sum() < 0:
            vec = -vec
        vec = np.abs(vec) if n == 1 else vec
        if best is None:
            best = (lam, members[0], vec, members)
        else:
            scale = max(abs(lam), abs(best[0]), 1.0)
            if lam > best[0] + 1e-9 * scale:
                best = (lam, members[0], vec, members)
            elif abs(lam - best[0]) <= 1e-9 * scale and members[0] < best[1]:
                best = (lam, members[0], vec, members)
    assert best is not None
    out = {v: 0.0 for v in nodes}
    _, _, vec, members = best
    vec = vec / np.linalg.norm(vec)
    for i, v in enumerate(members):
        out[v] = float(abs(vec[i]))
    return out


def percentile_linear(values: list[float], q: float) -> float:
    """Linear-interpolation percentile, written out longhand."""
    vs = sorted(values)
    if len(vs) == 1:
        return vs[0]
    rank = (q / 100.0) * (len(vs) - 1)
    lo = math.floor(rank)
    hi = math.ceil(rank)
    if lo == hi:
        return vs[lo]
    return vs[lo] + (rank - lo) * (vs[hi] - vs[lo])


def summary_oracle(values: list[float]) -> tuple[float, float, float, float]:
    """(mean, median, iqr, max_to_mean) with max_to_mean = 0 when mean <= 0."""
    mean = sum(values) / len(values)
    median = percentile_linear(values, 50)
    iqr = percentile_linear(values, 75) - percentile_linear(values, 25)
    ratio = max(values) / mean if mean > 0 else 0.0
    return mean, median, iqr, ratio


def aggregate_oracle(graph: CitationGraph) -> dict[str, float]:
    """The 20-value structural summary, recomputed from the oracles above."""
    out: dict[str, float] = {}
    metrics = {
        "degree_centrality": degree_oracle(graph),
        "closeness": closeness_oracle(graph),
        "eigenvector": eigenvector_oracle(graph),
        "clustering": clustering_oracle(graph),
    }
    for name, per_node in metrics.items():
        vals = [per_node[v] for v in graph.nodes]
        for stat, value in zip(("mean", "median", "iqr", "max_to_mean"), summary_oracle(vals)):
            out[f"{name}_{stat}"] = value
    degrees = [graph.degree(v) for v in graph.nodes]
    mean_deg = sum(degrees) / len(degrees)
    out["edge_count"] = float(graph.n_edges)
    out["node_count"] = float(graph.n_nodes)
    out["mean_degree"] = mean_deg
    out["degree_max_to_mean"] = max(degrees) / mean_deg if mean_deg > 0 else 0.0
    return out


# ---------------------------------------------------------------------------
# classifiers


def accuracy_oracle(y_true, y_pred) -> float:
    return float(accuracy_score(y_true, y_pred))


def f1_macro_oracle(y_true, y_pred) -> float:
    return float(f1_score(y_true, y_pred, labels=[0, 1], average="macro", zero_division=0))


def gini_impurity(labels) -> float:
    n = len(labels)
    n1 = sum(labels)
    return 1.0 - (n1 / n) ** 2 - ((n - n1) / n) ** 2


def all_split_gains(X: np.ndarray, y: np.ndarray) -> list[tuple[int, float, float]]:
    """Every (feature, midpoint threshold, Gini gain), by quadratic scan."""
    n, d = X.shape
    parent = gini_impurity(list(y))
    out = []
    for f in range(d):
        vs = sorted(set(X[:, f].tolist()))
        for lo, hi in zip(vs, vs[1:]):
            thr = (lo + hi) / 2.0
            left = [int(y[i]) for i in range(n) if X[i, f] <= thr]
            right = [int(y[i]) for i in range(n) if X[i, f] > thr]
            child = (len(left) * gini_impurity(left) + len(right) * gini_impurity(right)) / n
            out.append((f, thr, parent - child))
    return out


def best_split_oracle(X: np.ndarray, y: np.ndarray) -> tuple[int, float, float] | None:
    """The earliest maximum-gain split (features then thresholds ascending),
    or None when no split strictly reduces the Gini impurity."""
    best: tuple[int, float, float] | None = None
    for f, thr, gain in all_split_gains(X, y):
        if best is None or gain > best[2]:
            best = (f, thr, gain)
    if best is None or best[2] <= 0.0:
        return None
    return best


# ---------------------------------------------------------------------------
# PCA / distances


def pca_oracle(matrix: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """PCA via eigh of the Gram matrix instead of SVD of the data."""
    x = np.asarray(matrix, dtype=np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered
    vals, vecs = np.linalg.eigh(cov)
    order = np.argsort(vals)[::-1]
    vals = np.clip(vals[order], 0.0, None)
    comps = vecs[:, order].T[:k]
    signs = np.sign(comps[np.arange(k), np.argmax(np.abs(comps), axis=1)])
    signs[signs == 0] = 1.0
    comps = comps * signs[:, None]
    ratio = vals[:k] / vals.sum() if vals.sum() > 0 else np.zeros(k)
    return comps, ratio, centered @ comps.T


def w1_oracle(a, b) -> float:
    return float(sstats.wasserstein_distance(a, b))


def cosine_oracle(u, v) -> float:
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(x * x for x in v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return sum(a * b for a, b in zip(u, v)) / (nu * nv)


def apportion_oracle(total: int, fractions: list[float]) -> list[int]:
    """Largest-remainder apportionment, ties toward the earlier entry."""
    quotas = [total * f for f in fractions]
    counts = [math.floor(q) for q in quotas]
    leftover = total - sum(counts)
    order = sorted(range(len(fractions)), key=lambda i: (-(quotas[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


# ---------------------------------------------------------------------------
# GNN forward passes, one graph at a time, written as plain loops


def _leaky(x: float, slope: float = 0.2) -> float:
    return x if x > 0 else slope * x


def gnn_logit_oracle(arch: str, layers, head, feats: np.ndarray, adj: np.ndarray) -> float:
    """Logit for a single fully-real graph, computed nodewise.

    `layers` is a list of dicts of plain arrays (one per layer, same keys the
    model uses) and `head` holds `w` (hidden, 1) and `b` (1,).
    """
    n = feats.shape[0]
    h = feats.astype(np.float64).copy()
    neighbors = [[j for j in range(n) if adj[i, j] > 0] for i in range(n)]
    degrees = [len(nb) for nb in neighbors]
    for layer in layers:
        if arch == "gcn":
            dhat = [degrees[i] + 1.0 for i in range(n)]
            msg = np.zeros_like(h)
            for i in range(n):
                msg[i] += h[i] / dhat[i]  # self-loop term of A + I
                for j in neighbors[i]:
                    msg[i] += h[j] / math.sqrt(dhat[i] * dhat[j])
            h = np.maximum(msg @ layer["W"], 0.0)
        elif arch == "sage":
            nbr = np.zeros_like(h)
            for i in range(n):
                if degrees[i]:
                    nbr[i] = sum(h[j] for j in neighbors[i]) / degrees[i]
            h = np.maximum(np.concatenate([h, nbr], axis=1) @ layer["W"], 0.0)
        elif arch == "gat":
            wh = h @ layer["W"]
            src = (wh @ layer["a_src"]).ravel()
            dst = (wh @ layer["a_dst"]).ravel()
            out = np.zeros((n, wh.shape[1]))
            for i in range(n):
                cohort = neighbors[i] + [i]
                scores = [_leaky(src[i] + dst[j]) for j in cohort]
                mx = max(scores)
                exps = [math.exp(s - mx) for s in scores]
                z = sum(exps)
                for j, e in zip(cohort, exps):
                    out[i] += (e / z) * wh[j]
            h = np.maximum(out, 0.0)
        elif arch == "gin":
            agg = h.copy()
            for i in range(n):
                for j in neighbors[i]:
                    agg[i] += h[j]
            h = np.maximum(agg @ layer["W1"] + layer["b1"], 0.0) @ layer["W2"] + layer["b2"]
        else:
            raise ValueError(arch)
    pooled = h.sum(axis=0)
    return float(pooled @ head["w"].ravel() + head["b"][0])


def fd_gradient(loss_fn, array: np.ndarray, idx: tuple[int, ...], h: float = 1e-5) -> float:
    """Central finite difference of `loss_fn()` w.r.t. one array entry."""
    orig = array[idx]
    array[idx] = orig + h
    up = loss_fn()
    array[idx] = orig - h
    down = loss_fn()
    array[idx] = orig
    return (up - down) / (2.0 * h)
