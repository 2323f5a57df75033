"""citefp — citation-graph fingerprints of machine-generated bibliographies.

The package turns paired reference lists (a paper's real bibliography and a
machine-suggested one) into annotated citation graphs, extracts structural
and embedding-based features, and trains classifiers — a from-scratch random
forest and four message-passing architectures on a small autodiff engine —
to measure how distinguishable the two sides are, against degree-preserving
shuffle baselines and chance-level controls.
"""

__version__ = "0.1.0"

from . import baselines, data, errors, forest, graphs, seeding, semantic, structural  # noqa: F401
from .data import (  # noqa: F401
    BaselineKind,
    CitationEdgeSet,
    Dataset,
    EmbeddingTable,
    NodeCategory,
    PaperRecord,
    Provenance,
    ReferenceList,
    load_dataset,
    load_dataset_dir,
    load_embeddings,
    save_dataset,
    save_embeddings,
)
from .errors import CitefpError  # noqa: F401
from .graphs import CitationGraph, GraphPair, build_full_graph, size_match, split_graph  # noqa: F401
