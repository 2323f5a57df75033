"""Structural metrics against hand-worked cases and independent oracles."""

import math

import numpy as np
import pytest

from citefp import structural
from citefp.data import NodeCategory, Provenance
from citefp.errors import ConvergenceError, DegenerateGraphError
from citefp.graphs import CitationGraph
from citefp.report import read_csv

import oracles
from conftest import quick_graph, random_graph

# ----------------------------------------------------------------- hand cases


def test_path_of_three():
    g = quick_graph([("a", "b"), ("b", "c")], focal="b")
    assert structural.degree_centrality(g) == {"a": 0.5, "b": 1.0, "c": 0.5}
    clo = structural.closeness_centrality(g)
    assert clo["b"] == 1.0
    assert clo["a"] == pytest.approx(2 / 3)
    assert structural.clustering_coefficient(g) == {"a": 0.0, "b": 0.0, "c": 0.0}
    # eigenvector of the path is proportional to (1, sqrt(2), 1)
    eig = structural.eigenvector_centrality(g)
    assert eig["a"] == pytest.approx(0.5, abs=1e-6)
    assert eig["b"] == pytest.approx(math.sqrt(2) / 2, abs=1e-6)
    assert eig["c"] == pytest.approx(0.5, abs=1e-6)


def test_triangle_is_fully_symmetric():
    g = quick_graph([("a", "b"), ("b", "c"), ("a", "c")], focal="a")
    assert structural.clustering_coefficient(g) == {"a": 1.0, "b": 1.0, "c": 1.0}
    for value in structural.eigenvector_centrality(g).values():
        assert value == pytest.approx(1 / math.sqrt(3), abs=1e-6)
    assert structural.closeness_centrality(g) == {"a": 1.0, "b": 1.0, "c": 1.0}


def test_clique_minus_one_edge_clustering():
    g = quick_graph([("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d")], focal="a")
    clu = structural.clustering_coefficient(g)
    assert clu["c"] == 1.0 and clu["d"] == 1.0  # their two neighbors are linked
    assert clu["a"] == pytest.approx(2 / 3)
    assert clu["b"] == pytest.approx(2 / 3)


def test_star_eigenvector_ratio():
    g = quick_graph([("f", "x"), ("f", "y"), ("f", "z")], focal="f")
    eig = structural.eigenvector_centrality(g)
    assert eig["f"] / eig["x"] == pytest.approx(math.sqrt(3), abs=1e-5)
    assert eig["x"] == pytest.approx(eig["y"], abs=1e-9)


def test_disconnected_graph_conventions():
    # two disjoint edges: closeness scales by the reachable share
    g = quick_graph([("a", "f"), ("b", "c")], focal="f")
    clo = structural.closeness_centrality(g)
    assert all(v == pytest.approx(1 / 3) for v in clo.values())
    # equal top eigenvalues: the tie goes to the component with the smaller
    # min node, the other component reads zero
    eig = structural.eigenvector_centrality(g)
    assert eig["a"] == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert eig["f"] == pytest.approx(math.sqrt(0.5), abs=1e-6)
    assert eig["b"] == 0.0 and eig["c"] == 0.0


def test_isolated_node_reads_zero_everywhere():
    g = quick_graph([("a", "f")], focal="f", isolated=("z",))
    assert structural.closeness_centrality(g)["z"] == 0.0
    assert structural.degree_centrality(g)["z"] == 0.0
    assert structural.eigenvector_centrality(g)["z"] == 0.0
    assert structural.clustering_coefficient(g)["z"] == 0.0


def test_eigenvector_argument_validation():
    g = quick_graph([("a", "f")], focal="f")
    with pytest.raises(ValueError):
        structural.eigenvector_centrality(g, shift=0.0)
    with pytest.raises(ValueError):
        structural.eigenvector_centrality(g, shift=-1.0)
    path6 = quick_graph([(f"n{i}", f"n{i+1}") for i in range(5)], focal="n0")
    with pytest.raises(ConvergenceError):
        structural.eigenvector_centrality(path6, tol=1e-12, max_iter=3)


def test_single_node_graphs_cannot_exist():
    # the degenerate case is rejected at construction: a lone focal has degree 0
    with pytest.raises(DegenerateGraphError):
        CitationGraph(
            focal="f",
            nodes=("f",),
            edges=frozenset(),
            categories={"f": NodeCategory.FOCAL},
            provenance=Provenance.ground_truth(),
        )


# ------------------------------------------------------------ oracle sweeps


def test_metrics_match_oracles_on_random_graphs():
    rng = np.random.default_rng(42)
    for trial in range(60):
        n = int(rng.integers(2, 13))
        g = random_graph(rng, n, p=float(rng.uniform(0.1, 0.7)))
        assert structural.degree_centrality(g) == pytest.approx(oracles.degree_oracle(g), abs=1e-12)
        assert structural.closeness_centrality(g) == pytest.approx(oracles.closeness_oracle(g), abs=1e-12)
        assert structural.clustering_coefficient(g) == pytest.approx(oracles.clustering_oracle(g), abs=1e-12)
        eig = structural.eigenvector_centrality(g, tol=1e-9)
        assert eig == pytest.approx(oracles.eigenvector_oracle(g), abs=1e-8)
        for metric in (eig, structural.closeness_centrality(g), structural.clustering_coefficient(g)):
            assert all(0.0 <= v <= 1.0 + 1e-12 for v in metric.values())


def test_eigenvector_dominant_component_with_unequal_sizes():
    # triangle (top eigenvalue 3) versus an edge (top eigenvalue 2): the
    # triangle wins even though the edge holds the lexically smaller node
    g = quick_graph([("x", "y"), ("x", "z"), ("y", "z"), ("a", "f")], focal="f")
    eig = structural.eigenvector_centrality(g)
    assert eig["a"] == 0.0 and eig["f"] == 0.0
    assert eig["x"] == pytest.approx(1 / math.sqrt(3), abs=1e-6)
    assert eig == pytest.approx(oracles.eigenvector_oracle(g), abs=1e-6)


# --------------------------------------------------------------- aggregation


def test_summary_stats_match_longhand():
    rng = np.random.default_rng(1)
    for _ in range(25):
        vals = rng.uniform(0, 2, size=int(rng.integers(1, 20)))
        got = structural._summary(vals)
        assert got == pytest.approx(oracles.summary_oracle(list(vals)), abs=1e-12)


def test_summary_zero_mean_ratio_convention():
    assert structural._summary(np.zeros(4))[3] == 0.0


def test_aggregate_matches_oracle():
    rng = np.random.default_rng(7)
    for _ in range(30):
        g = random_graph(rng, int(rng.integers(3, 12)), p=0.4)
        agg = structural.aggregate(g)
        want = oracles.aggregate_oracle(g)
        assert set(agg) == set(structural.AGGREGATE_COLUMNS) == set(want)
        for col in structural.AGGREGATE_COLUMNS:
            tol = 5e-6 if col.startswith("eigenvector") else 1e-9
            assert agg[col] == pytest.approx(want[col], abs=tol), col


def test_aggregate_vector_order():
    g = quick_graph([("a", "f"), ("b", "f")], focal="f")
    agg = structural.aggregate(g)
    vec = structural.aggregate_vector(g)
    assert vec.shape == (len(structural.AGGREGATE_COLUMNS),)
    np.testing.assert_array_equal(vec, [agg[c] for c in structural.AGGREGATE_COLUMNS])


def test_node_features_layout():
    g = quick_graph([("a", "f"), ("b", "f"), ("a", "b")], focal="f")
    feats = structural.structural_node_features(g)
    assert feats.shape == (3, len(structural.NODE_FEATURE_NAMES))
    deg = structural.degree_centrality(g)
    np.testing.assert_allclose(feats[:, 0], [deg[v] for v in g.nodes])
    np.testing.assert_allclose(feats[:, 4], float(g.n_edges))


def test_write_structural_features_round_trips_floats(tmp_path):
    rng = np.random.default_rng(3)
    graphs = [random_graph(rng, 6, p=0.5) for _ in range(4)]
    path = tmp_path / "structural.csv"
    assert structural.write_structural_features(graphs, path) == 4
    header, rows = read_csv(path)
    assert header == ["focal_id", "provenance"] + list(structural.AGGREGATE_COLUMNS)
    for g, row in zip(graphs, rows):
        assert row["provenance"] == "ground_truth"
        agg = structural.aggregate(g)
        for col in structural.AGGREGATE_COLUMNS:
            assert float(row[col]) == agg[col]  # repr() round-trips exactly
