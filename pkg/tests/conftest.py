"""Shared builders and fixtures for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from citefp.data import (
    CitationEdgeSet,
    Dataset,
    EmbeddingTable,
    NodeCategory,
    PaperRecord,
    Provenance,
    ReferenceList,
)
from citefp.experiments import synth
from citefp.graphs import CitationGraph


def paper(pid: str, year: int = 2015, field: str = "phys", subfield: str | None = None) -> PaperRecord:
    return PaperRecord(id=pid, title=f"Paper {pid}", year=year, top_field=field, subfield=subfield)


def quick_graph(edges, focal=None, isolated=(), provenance=None) -> CitationGraph:
    """A CitationGraph from an edge list; every node ground-truth but the focal."""
    canon = frozenset(tuple(sorted(e)) for e in edges)
    nodes = sorted({u for e in canon for u in e} | set(isolated))
    focal = focal if focal is not None else nodes[0]
    categories = {v: NodeCategory.GROUND_TRUTH_ONLY for v in nodes}
    categories[focal] = NodeCategory.FOCAL
    return CitationGraph(
        focal=focal,
        nodes=tuple(nodes),
        edges=canon,
        categories=categories,
        provenance=provenance or Provenance.ground_truth(),
    )


def random_graph(rng: np.random.Generator, n: int, p: float = 0.3) -> CitationGraph:
    """A random connected-enough graph: G(n, p) plus a star on the focal."""
    names = [f"n{i:02d}" for i in range(n)]
    edges = {(names[0], names[i]) for i in range(1, n)}
    for i in range(1, n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.add((names[i], names[j]))
    return quick_graph(edges, focal=names[0])


def tiny_dataset() -> tuple[Dataset, EmbeddingTable]:
    """Two focals, three fields, one generated list each, handmade edges."""
    papers = [
        paper("f1", 2020, "phys", "astro"),
        paper("f2", 2021, "bio", "cells"),
        paper("r1", 2010, "phys", "astro"),
        paper("r2", 2012, "phys", "optics"),
        paper("r3", 2015, "bio", "cells"),
        paper("r4", 2018, "bio", "genes"),
        paper("r5", 2016, "cs", "ml"),
        paper("r6", 2019, "cs", "ml"),
    ]
    edges = CitationEdgeSet([("r2", "r1"), ("r4", "r3"), ("r6", "r5"), ("f1", "r1")])
    reflists = (
        ReferenceList("f1", "ground_truth", ("r1", "r2", "r5")),
        ReferenceList("f1", "generated:alpha", ("r1", "r6", "ghost-1")),
        ReferenceList("f2", "ground_truth", ("r3", "r4", "r6")),
        ReferenceList("f2", "generated:alpha", ("r4", "r5")),
    )
    dataset = Dataset(papers={p.id: p for p in papers}, edges=edges, reflists=reflists)
    rng = np.random.default_rng(7)
    ids = [p.id for p in papers] + ["ghost-1"]
    table = EmbeddingTable({pid: rng.normal(size=8) for pid in ids}, dim=8)
    return dataset, table


@pytest.fixture(scope="session")
def synth_small() -> tuple[Dataset, EmbeddingTable]:
    """A 60-focal synthetic corpus shared by the slower integration tests."""
    return synth.generate(synth.SynthParams(n_focals=60, seed=3))
