"""Record validation, dataset indexing, and file round trips."""

import json

import numpy as np
import pytest

from citefp.data import (
    EMBEDDINGS_FILE,
    CitationEdgeSet,
    Dataset,
    EmbeddingTable,
    PaperRecord,
    Provenance,
    ReferenceList,
    load_dataset,
    load_dataset_dir,
    load_embeddings,
    save_dataset,
    save_embeddings,
)
from citefp.errors import (
    DataFormatError,
    DimensionMismatchError,
    DuplicateIdError,
    MissingEmbeddingError,
    NonFiniteError,
    UnresolvedFocalError,
)

from conftest import paper, tiny_dataset

# ------------------------------------------------------------------- records


def test_paper_record_happy_path():
    rec = PaperRecord.from_dict({"id": "p1", "title": "T", "year": 1999, "top_field": "cs"})
    assert rec.subfield is None and rec.abstract is None
    rec.validate()


@pytest.mark.parametrize(
    "patch",
    [
        {"id": ""},
        {"year": "1999"},
        {"year": True},
        {"year": 1700},
        {"year": 2200},
        {"top_field": ""},
    ],
)
def test_paper_record_rejects_bad_fields(patch):
    base = {"id": "p1", "title": "T", "year": 1999, "top_field": "cs"}
    with pytest.raises(DataFormatError):
        PaperRecord.from_dict({**base, **patch})


def test_paper_record_missing_field_names_the_field():
    with pytest.raises(DataFormatError, match="year"):
        PaperRecord.from_dict({"id": "p1", "top_field": "cs"})


@pytest.mark.parametrize("source", ["ground_truth", "generated:alpha", "baseline:temporal"])
def test_reference_list_valid_sources(source):
    ReferenceList("f", source, ("a", "b")).validate()


@pytest.mark.parametrize(
    "focal,source,refs",
    [
        ("", "ground_truth", ("a",)),
        ("f", "", ("a",)),
        ("f", "made_up", ("a",)),
        ("f", "generated:", ("a",)),
        ("f", "baseline:unknown", ("a",)),
        ("f", "ground_truth", ()),
        ("f", "ground_truth", ("a", "a")),
        ("f", "ground_truth", ("f", "a")),
    ],
)
def test_reference_list_rejects_bad_shapes(focal, source, refs):
    with pytest.raises(DataFormatError):
        ReferenceList(focal, source, refs).validate()


def test_provenance_labels_round_trip():
    for prov in (
        Provenance.ground_truth(),
        Provenance.generated("alpha"),
        Provenance.baseline("field"),
        Provenance.full("alpha"),
    ):
        assert Provenance.parse(prov.label) == prov


def test_provenance_rejects_malformed():
    with pytest.raises(DataFormatError):
        Provenance("nonsense")
    with pytest.raises(DataFormatError):
        Provenance("ground_truth", "named")
    with pytest.raises(DataFormatError):
        Provenance("generated")
    with pytest.raises(DataFormatError):
        Provenance.baseline("chronological")
    with pytest.raises(ValueError):
        Provenance.generated("alpha").baseline_kind


# --------------------------------------------------------------------- edges


def test_edge_set_dedupes_and_links_both_ways():
    es = CitationEdgeSet([("a", "b"), ("a", "b"), ("c", "a")])
    assert len(es) == 2
    assert es.linked("a", "b") and es.linked("b", "a")
    assert es.undirected_neighbors("a") == {"b", "c"}
    assert es.undirected_neighbors("zzz") == frozenset()
    with pytest.raises(DataFormatError):
        CitationEdgeSet([("x", "x")])


# ------------------------------------------------------------------- dataset


def test_dataset_lookups():
    ds, _ = tiny_dataset()
    assert ds.counts == (8, 4, 4)
    assert ds.generators() == ("alpha",)
    assert ds.focal_ids() == ("f1", "f2")
    assert ds.ground_truth_list("f1").refs == ("r1", "r2", "r5")
    assert ds.generated_list("f1", "alpha").refs == ("r1", "r6", "ghost-1")
    assert ds.generated_list("f1", "beta") is None
    assert ds.year("r3") == 2015
    assert ds.year("ghost-1") is None
    assert ds.unresolved_refs == {"ghost-1"}


def test_dataset_rejects_duplicate_list_keys():
    ds, _ = tiny_dataset()
    dup = ReferenceList("f1", "ground_truth", ("r9",))
    with pytest.raises(DataFormatError):
        Dataset(papers=ds.papers, edges=ds.edges, reflists=ds.reflists + (dup,))


def test_with_reflists_validates_and_extends():
    ds, _ = tiny_dataset()
    extra = ReferenceList("f1", "baseline:field", ("r3", "r4"))
    out = ds.with_reflists([extra])
    assert out.baseline_list("f1", "field").refs == ("r3", "r4")
    assert ds.baseline_list("f1", "field") is None  # original untouched
    with pytest.raises(DataFormatError):
        ds.with_reflists([ReferenceList("f1", "ground_truth", ())])


# --------------------------------------------------------------- file formats


def test_dataset_round_trip(tmp_path):
    ds, _ = tiny_dataset()
    save_dataset(ds, tmp_path)
    back = load_dataset_dir(tmp_path)
    assert back.counts == ds.counts
    assert back.papers == dict(ds.papers)
    assert back.edges.edges == ds.edges.edges
    assert sorted(back.reflists, key=lambda l: (l.focal_id, l.source)) == sorted(
        ds.reflists, key=lambda l: (l.focal_id, l.source)
    )


def _write(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def test_loader_reports_file_and_line(tmp_path):
    _write(tmp_path / "papers.jsonl", [json.dumps({"id": "p1", "year": 2000, "top_field": "cs"}), "{bad json"])
    _write(tmp_path / "citations.tsv", [])
    _write(tmp_path / "reflists.jsonl", [])
    with pytest.raises(DataFormatError, match=r"papers\.jsonl:2"):
        load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")


def test_loader_duplicate_paper_cites_first_definition(tmp_path):
    row = json.dumps({"id": "p1", "year": 2000, "top_field": "cs"})
    _write(tmp_path / "papers.jsonl", [row, "", row])  # blank line is skipped, not counted as a record
    _write(tmp_path / "citations.tsv", [])
    _write(tmp_path / "reflists.jsonl", [])
    with pytest.raises(DuplicateIdError, match="line 1"):
        load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")


def test_loader_edge_validation(tmp_path):
    _write(tmp_path / "papers.jsonl", [json.dumps({"id": "p1", "year": 2000, "top_field": "cs"})])
    _write(tmp_path / "reflists.jsonl", [])
    _write(tmp_path / "citations.tsv", ["a\tb", "a\tb", "b\ta"])
    ds = load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")
    assert len(ds.edges) == 2  # (a,b) deduped; (b,a) is a distinct directed row
    assert ds.duplicate_edge_count == 1

    _write(tmp_path / "citations.tsv", ["a b"])
    with pytest.raises(DataFormatError, match=r"citations\.tsv:1"):
        load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")

    _write(tmp_path / "citations.tsv", ["a\ta"])
    with pytest.raises(DataFormatError, match="self-citation"):
        load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")


def test_loader_unknown_focal(tmp_path):
    _write(tmp_path / "papers.jsonl", [json.dumps({"id": "p1", "year": 2000, "top_field": "cs"})])
    _write(tmp_path / "citations.tsv", [])
    _write(tmp_path / "reflists.jsonl", [json.dumps({"focal_id": "mystery", "source": "ground_truth", "refs": ["p1"]})])
    with pytest.raises(UnresolvedFocalError):
        load_dataset(tmp_path / "papers.jsonl", tmp_path / "citations.tsv", tmp_path / "reflists.jsonl")


# ----------------------------------------------------------------- embeddings


def test_embedding_table_basics():
    table = EmbeddingTable({"b": np.ones(3), "a": np.zeros(3)}, dim=3)
    assert table.ids() == ("a", "b")
    assert "a" in table and len(table) == 2
    assert table.get("zz") is None
    assert table.missing(["a", "q", "b", "p"]) == ("p", "q")
    assert table.matrix([]).shape == (0, 3)
    np.testing.assert_array_equal(table.matrix(["a", "b"]), np.stack([np.zeros(3), np.ones(3)]))
    with pytest.raises(MissingEmbeddingError):
        table.vector("zz")
    with pytest.raises(DimensionMismatchError):
        EmbeddingTable({"a": np.zeros(4)}, dim=3)
    with pytest.raises(NonFiniteError):
        EmbeddingTable({"a": np.array([1.0, np.nan, 0.0])}, dim=3)


def test_embeddings_file_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    table = EmbeddingTable({f"p{i}": rng.normal(size=5) for i in range(4)}, dim=5)
    path = tmp_path / EMBEDDINGS_FILE
    save_embeddings(table, path)
    back = load_embeddings(path)
    assert back.dim == 5 and back.ids() == table.ids()
    for pid in table.ids():
        np.testing.assert_array_equal(back.vector(pid), table.vector(pid))


def test_load_embeddings_validation(tmp_path):
    path = tmp_path / "emb.jsonl"
    _write(path, [json.dumps({"id": "a", "vec": [1.0, 2.0]}), json.dumps({"id": "b", "vec": [1.0]})])
    with pytest.raises(DimensionMismatchError, match="emb.jsonl:2"):
        load_embeddings(path)
    with pytest.raises(DimensionMismatchError):
        _write(path, [json.dumps({"id": "a", "vec": [1.0, 2.0]})])
        load_embeddings(path, expected_dim=3)
    _write(path, [json.dumps({"id": "a", "vec": [1.0]}), json.dumps({"id": "a", "vec": [2.0]})])
    with pytest.raises(DuplicateIdError):
        load_embeddings(path)
    _write(path, [])
    with pytest.raises(DataFormatError, match="no embeddings"):
        load_embeddings(path)


def test_paper_helper_builds_valid_records():
    paper("x", 2001, "cs").validate()
