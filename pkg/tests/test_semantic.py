"""Embedding views, alignment diagnostics, PCA, and the control table."""

import json
import math

import numpy as np
import pytest

from citefp import semantic
from citefp.data import EmbeddingTable, NodeCategory
from citefp.errors import DataFormatError, MissingEmbeddingError
from citefp.graphs import build_full_graph
from citefp.data import CitationEdgeSet
from citefp.report import read_csv

import oracles
from conftest import quick_graph, random_graph


def table_for(graph, dim=6, seed=0, skip=()):
    rng = np.random.default_rng(seed)
    return EmbeddingTable({v: rng.normal(size=dim) for v in graph.nodes if v not in skip}, dim=dim)


# -------------------------------------------------------------------- cosine


def test_cosine_hand_values():
    e1, e2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
    assert semantic.cosine(e1, e1) == pytest.approx(1.0)
    assert semantic.cosine(e1, e2) == 0.0
    assert semantic.cosine(e1, -e1) == pytest.approx(-1.0)
    assert semantic.cosine(np.zeros(2), e1) == 0.0  # zero norm reads 0 by convention


def test_cosine_matches_oracle():
    rng = np.random.default_rng(5)
    for _ in range(50):
        u, v = rng.normal(size=4), rng.normal(size=4)
        assert semantic.cosine(u, v) == pytest.approx(oracles.cosine_oracle(u, v), abs=1e-12)


# ----------------------------------------------------------- graph embedding


def test_graph_embedding_coverage_and_refsum():
    g = quick_graph([("f", "a"), ("f", "b"), ("f", "c")], focal="f")
    table = table_for(g, skip=("c",))
    emb = semantic.graph_embedding(g, table)
    assert emb.ref_ids == ("a", "b")
    assert emb.coverage == pytest.approx(2 / 3)
    np.testing.assert_allclose(emb.ref_sum, table.vector("a") + table.vector("b"))

    none_covered = semantic.graph_embedding(g, table_for(g, skip=("a", "b", "c")))
    assert none_covered.coverage == 0.0
    np.testing.assert_array_equal(none_covered.ref_sum, np.zeros(6))

    with pytest.raises(MissingEmbeddingError):
        semantic.graph_embedding(g, table_for(g, skip=("f",)))


def test_refsum_brute_force_sweep():
    rng = np.random.default_rng(11)
    for _ in range(40):
        g = random_graph(rng, int(rng.integers(2, 10)))
        table = table_for(g, seed=int(rng.integers(0, 1000)))
        emb = semantic.graph_embedding(g, table)
        want = np.zeros(6)
        for r in g.reference_nodes:
            if r in table:
                want = want + table.vector(r)
        np.testing.assert_allclose(emb.ref_sum, want, atol=1e-9)


# ----------------------------------------------------------------- alignment


def test_alignment_hand_case():
    g = quick_graph([("f", "a"), ("f", "b")], focal="f")
    table = EmbeddingTable(
        {"f": np.array([1.0, 0.0]), "a": np.array([1.0, 0.0]), "b": np.array([0.0, 1.0])}, dim=2
    )
    diag = semantic.alignment(semantic.graph_embedding(g, table))
    assert diag.focal_ref_cosine_mean == pytest.approx(0.5)
    assert diag.ref_ref_cosine_mean == pytest.approx(0.0)
    assert diag.focal_refsum_cosine == pytest.approx(1 / math.sqrt(2))
    assert diag.focal_ref_euclidean_mean == pytest.approx(math.sqrt(2) / 2)
    assert diag.ref_ref_euclidean_mean == pytest.approx(math.sqrt(2))
    assert diag.focal_refsum_euclidean == pytest.approx(1.0)


def test_alignment_degenerate_counts():
    g = quick_graph([("f", "a")], focal="f")
    empty = semantic.alignment(semantic.graph_embedding(g, table_for(g, skip=("a",))))
    assert all(v is None for v in empty.as_dict().values())

    single = semantic.alignment(semantic.graph_embedding(g, table_for(g)))
    assert single.ref_ref_cosine_mean is None and single.ref_ref_euclidean_mean is None
    assert single.focal_ref_cosine_mean is not None
    assert single.focal_refsum_euclidean is not None


def test_alignment_matches_pairwise_brute_force():
    g = quick_graph([("f", f"r{i}") for i in range(20)], focal="f")
    table = table_for(g, dim=5, seed=9)
    emb = semantic.graph_embedding(g, table)
    diag = semantic.alignment(emb)

    f = table.vector("f")
    refs = [table.vector(r) for r in emb.ref_ids]
    fr_cos = [oracles.cosine_oracle(f, r) for r in refs]
    fr_eu = [float(np.linalg.norm(f - r)) for r in refs]
    rr_cos, rr_eu = [], []
    for i in range(len(refs)):
        for j in range(i + 1, len(refs)):
            rr_cos.append(oracles.cosine_oracle(refs[i], refs[j]))
            rr_eu.append(float(np.linalg.norm(refs[i] - refs[j])))
    s = sum(refs)
    assert diag.focal_ref_cosine_mean == pytest.approx(np.mean(fr_cos), abs=1e-9)
    assert diag.ref_ref_cosine_mean == pytest.approx(np.mean(rr_cos), abs=1e-9)
    assert diag.focal_refsum_cosine == pytest.approx(oracles.cosine_oracle(f, s), abs=1e-9)
    assert diag.focal_ref_euclidean_mean == pytest.approx(np.mean(fr_eu), abs=1e-9)
    assert diag.ref_ref_euclidean_mean == pytest.approx(np.mean(rr_eu), abs=1e-9)
    assert diag.focal_refsum_euclidean == pytest.approx(float(np.linalg.norm(f - s)), abs=1e-9)


# ----------------------------------------------------------------------- pca


def test_pca_validation():
    x = np.random.default_rng(0).normal(size=(5, 3))
    with pytest.raises(ValueError):
        semantic.pca(x[:1], 1)
    with pytest.raises(ValueError):
        semantic.pca(x, 0)
    with pytest.raises(ValueError):
        semantic.pca(x, 4)  # k > d
    with pytest.raises(ValueError):
        semantic.pca(x[:3], 3)  # k > n - 1


def test_pca_matches_eigh_oracle():
    rng = np.random.default_rng(8)
    for _ in range(15):
        n, d = int(rng.integers(4, 30)), int(rng.integers(2, 10))
        k = int(rng.integers(1, min(n - 1, d) + 1))
        x = rng.normal(size=(n, d)) * rng.uniform(0.5, 3.0, size=d)
        comps, ratio, proj = semantic.pca(x, k)
        o_comps, o_ratio, o_proj = oracles.pca_oracle(x, k)
        np.testing.assert_allclose(comps, o_comps, atol=1e-7)
        np.testing.assert_allclose(ratio, o_ratio, atol=1e-9)
        np.testing.assert_allclose(proj, o_proj, atol=1e-6)
        # orthonormal rows, sign convention, ratio bounded by 1
        np.testing.assert_allclose(comps @ comps.T, np.eye(k), atol=1e-9)
        assert all(comps[i, np.argmax(np.abs(comps[i]))] > 0 for i in range(k))
        assert 0.0 <= ratio.sum() <= 1.0 + 1e-12


def test_pca_isotropic_and_stretched_variance():
    rng = np.random.default_rng(1)
    iso = rng.normal(size=(10_000, 2))
    _, ratio, _ = semantic.pca(iso, 2)
    assert ratio[0] == pytest.approx(0.5, abs=0.02)
    assert ratio.sum() == pytest.approx(1.0, abs=1e-12)

    stretched = rng.normal(size=(5_000, 2)) * np.array([10.0, 1.0])
    comps, ratio, _ = semantic.pca(stretched, 1)
    assert ratio[0] == pytest.approx(100 / 101, abs=0.01)
    assert abs(comps[0, 0]) > 0.99  # first axis dominates


def test_pca_zero_variance():
    x = np.ones((3, 2))
    comps, ratio, proj = semantic.pca(x, 1)
    np.testing.assert_array_equal(ratio, [0.0])
    np.testing.assert_allclose(proj, np.zeros((3, 1)), atol=1e-12)


# ------------------------------------------------------- category similarity


def test_isolated_node_similarity_grouping():
    edges = CitationEdgeSet([("a", "c")])
    g = build_full_graph("f", ["a", "c"], ["a", "iso"], edges, generator="alpha")
    table = table_for(g, dim=4, seed=2)
    out = semantic.isolated_node_similarity(g, table)
    assert NodeCategory.FOCAL not in out
    assert set(out) == {NodeCategory.SHARED, NodeCategory.GROUND_TRUTH_ONLY, NodeCategory.GENERATED_ISOLATED}
    # each embedded non-focal node scores against all other embedded nodes
    vecs = {v: table.vector(v) for v in g.nodes}
    want_iso = np.mean([oracles.cosine_oracle(vecs["iso"], vecs[u]) for u in g.nodes if u != "iso"])
    assert out[NodeCategory.GENERATED_ISOLATED] == [pytest.approx(want_iso)]


def test_isolated_node_similarity_needs_two_embedded():
    g = quick_graph([("f", "a")], focal="f")
    assert semantic.isolated_node_similarity(g, table_for(g, skip=("a",))) == {}


# ------------------------------------------------------------- control table


def test_random_vector_table_is_id_stable():
    a = semantic.random_vector_table(["x", "y"], dim=4, seed=0)
    b = semantic.random_vector_table(["y", "z", "x"], dim=4, seed=0)
    np.testing.assert_array_equal(a.vector("x"), b.vector("x"))
    np.testing.assert_array_equal(a.vector("y"), b.vector("y"))
    c = semantic.random_vector_table(["x"], dim=4, seed=1)
    assert not np.array_equal(a.vector("x"), c.vector("x"))


def test_random_vector_table_is_standard_normal_ish():
    table = semantic.random_vector_table([f"p{i}" for i in range(1000)], dim=64, seed=0)
    stacked = table.matrix(table.ids())
    assert abs(stacked.mean()) < 0.02
    assert stacked.std() == pytest.approx(1.0, abs=0.02)


# ----------------------------------------------------------------- file I/O


def test_write_semantic_features_blank_cells(tmp_path):
    g_none = quick_graph([("f", "a")], focal="f")
    table = EmbeddingTable({"f": np.ones(3)}, dim=3)  # no reference vectors at all
    path = tmp_path / "semantic.csv"
    assert semantic.write_semantic_features([g_none], table, path) == 1
    header, rows = read_csv(path)
    assert header == ["focal_id", "provenance"] + list(semantic.SEMANTIC_COLUMNS)
    row = rows[0]
    assert row["focal_ref_cosine_mean"] == ""
    assert row["coverage"] == repr(0.0)


def test_write_semantic_features_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    graphs = [random_graph(rng, 6) for _ in range(3)]
    tables = [table_for(g, seed=i) for i, g in enumerate(graphs)]
    merged = EmbeddingTable(
        {v: t.vector(v) for g, t in zip(graphs, tables) for v in g.nodes}, dim=6
    )
    path = tmp_path / "semantic.csv"
    semantic.write_semantic_features(graphs, merged, path)
    _, rows = read_csv(path)
    for g, row in zip(graphs, rows):
        diag = semantic.alignment(semantic.graph_embedding(g, merged))
        assert float(row["focal_refsum_cosine"]) == diag.focal_refsum_cosine


def test_graph_embeddings_binary_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    rows = [(f"g{i}", rng.normal(size=5)) for i in range(7)]
    path = tmp_path / "vectors.bin"
    semantic.write_graph_embeddings(rows, dim=5, path=path)
    order, matrix = semantic.read_graph_embeddings(path)
    assert order == [f"g{i}" for i in range(7)]
    assert matrix.dtype == np.float32 and matrix.shape == (7, 5)
    np.testing.assert_array_equal(matrix, np.stack([v for _, v in rows]).astype(np.float32))


def test_graph_embeddings_validation(tmp_path):
    path = tmp_path / "vectors.bin"
    with pytest.raises(DataFormatError):
        semantic.write_graph_embeddings([("g", np.zeros(3))], dim=4, path=path)

    path.write_bytes(b"not json\n" + b"\x00" * 16)
    with pytest.raises(DataFormatError, match="header"):
        semantic.read_graph_embeddings(path)

    header = json.dumps({"dim": 4, "count": 2, "order": ["a", "b"]}).encode() + b"\n"
    path.write_bytes(header + b"\x00" * 16)  # one row short
    with pytest.raises(DataFormatError, match="expected 2 rows"):
        semantic.read_graph_embeddings(path)
