"""Records, loaders and serialization for citation datasets.

A dataset is a directory with fixed file names:

``papers.jsonl``
    One paper per line: ``{"id", "title", "abstract", "year", "top_field",
    "subfield"}``.  ``abstract`` and ``subfield`` may be null.
``citations.tsv``
    One directed edge per line: ``citing<TAB>cited``.
``reflists.jsonl``
    One reference list per line: ``{"focal_id", "source", "refs": [...]}``
    where ``source`` is ``"ground_truth"``, ``"generated:<name>"`` or
    ``"baseline:<kind>"``.
``embeddings.jsonl``
    One vector per line: ``{"id", "vec": [...]}``.  Loaded separately via
    :func:`load_embeddings` since not every workflow needs vectors.

Loading is streaming and single-threaded; files are read once in a fixed
order (papers, then edges, then lists), and every validation error names the
offending file, line, and field.

Embedding lookup goes through the :class:`EmbeddingProvider` interface,
``fetch(paper_id, text) -> vector``.  The shipped implementation is the
file-backed :class:`FileEmbeddingProvider`.  A network-backed provider would
POST ``{"input": <text>}`` as JSON and read ``{"embedding": [floats]}`` from
the response; that wire contract is documented here for interoperability but
no HTTP client ships with the toolkit.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Protocol, Sequence

import numpy as np

from .errors import (
    DataFormatError,
    DimensionMismatchError,
    DuplicateIdError,
    MissingEmbeddingError,
    NonFiniteError,
    UnresolvedFocalError,
)

__all__ = [
    "YEAR_MIN",
    "YEAR_MAX",
    "BaselineKind",
    "NodeCategory",
    "Provenance",
    "PaperRecord",
    "ReferenceList",
    "CitationEdgeSet",
    "Dataset",
    "EmbeddingTable",
    "EmbeddingProvider",
    "FileEmbeddingProvider",
    "load_dataset",
    "load_dataset_dir",
    "save_dataset",
    "load_embeddings",
    "save_embeddings",
    "PAPERS_FILE",
    "EDGES_FILE",
    "REFLISTS_FILE",
    "EMBEDDINGS_FILE",
]

YEAR_MIN = 1800
YEAR_MAX = 2100

PAPERS_FILE = "papers.jsonl"
EDGES_FILE = "citations.tsv"
REFLISTS_FILE = "reflists.jsonl"
EMBEDDINGS_FILE = "embeddings.jsonl"


# ---------------------------------------------------------------- vocabulary


class BaselineKind(enum.Enum):
    """Degree-preserving shuffle variants."""

    FIELD = "field"
    SUBFIELD = "subfield"
    TEMPORAL = "temporal"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def parse(cls, label: str) -> "BaselineKind":
        try:
            return cls(label)
        except ValueError:
            valid = ", ".join(k.value for k in cls)
            raise DataFormatError(f"unknown baseline kind {label!r} (expected one of: {valid})") from None


class NodeCategory(enum.Enum):
    """Role of a node inside a citation graph."""

    FOCAL = "focal"
    SHARED = "shared"
    GENERATED_CONNECTED = "generated_connected"
    GENERATED_ISOLATED = "generated_isolated"
    GROUND_TRUTH_ONLY = "ground_truth_only"

    @property
    def label(self) -> str:
        return self.value

    @classmethod
    def parse(cls, label: str) -> "NodeCategory":
        try:
            return cls(label)
        except ValueError:
            valid = ", ".join(c.value for c in cls)
            raise DataFormatError(f"unknown node category {label!r} (expected one of: {valid})") from None


@dataclass(frozen=True)
class Provenance:
    """Where a graph (or reference list) came from.

    ``kind`` is one of ``ground_truth``, ``generated``, ``baseline`` or
    ``full`` (the annotated union graph before splitting); ``generated`` and
    ``full`` carry a generator name, ``baseline`` carries the shuffle kind.
    """

    kind: str
    name: str | None = None

    _KINDS = ("ground_truth", "generated", "baseline", "full")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise DataFormatError(f"unknown provenance kind {self.kind!r}")
        if self.kind == "ground_truth" and self.name is not None:
            raise DataFormatError("ground_truth provenance carries no name")
        if self.kind in ("generated", "baseline", "full") and not self.name:
            raise DataFormatError(f"{self.kind} provenance requires a name")
        if self.kind == "baseline":
            BaselineKind.parse(self.name)  # type: ignore[arg-type]

    @property
    def label(self) -> str:
        return self.kind if self.name is None else f"{self.kind}:{self.name}"

    @classmethod
    def ground_truth(cls) -> "Provenance":
        return cls("ground_truth")

    @classmethod
    def generated(cls, name: str) -> "Provenance":
        return cls("generated", name)

    @classmethod
    def baseline(cls, kind: "BaselineKind | str") -> "Provenance":
        kind = kind if isinstance(kind, BaselineKind) else BaselineKind.parse(kind)
        return cls("baseline", kind.value)

    @classmethod
    def full(cls, name: str) -> "Provenance":
        return cls("full", name)

    @classmethod
    def parse(cls, label: str) -> "Provenance":
        kind, _, name = label.partition(":")
        return cls(kind, name or None)

    @property
    def baseline_kind(self) -> BaselineKind:
        if self.kind != "baseline":
            raise ValueError(f"provenance {self.label!r} is not a baseline")
        return BaselineKind(self.name)

    def __str__(self) -> str:  # pragma: no cover - convenience
        return self.label


# ------------------------------------------------------------------- records


@dataclass(frozen=True)
class PaperRecord:
    """Metadata for one paper."""

    id: str
    title: str
    year: int
    top_field: str
    subfield: str | None = None
    abstract: str | None = None

    def validate(self) -> None:
        if not self.id:
            raise DataFormatError("field 'id' must be a nonempty string")
        if not isinstance(self.year, int) or isinstance(self.year, bool):
            raise DataFormatError(f"field 'year' must be an integer, got {self.year!r}")
        if not (YEAR_MIN <= self.year <= YEAR_MAX):
            raise DataFormatError(f"field 'year' must lie in [{YEAR_MIN}, {YEAR_MAX}], got {self.year}")
        if not self.top_field:
            raise DataFormatError("field 'top_field' must be a nonempty string")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "abstract": self.abstract,
            "year": self.year,
            "top_field": self.top_field,
            "subfield": self.subfield,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PaperRecord":
        try:
            rec = cls(
                id=d["id"],
                title=d.get("title") or "",
                abstract=d.get("abstract"),
                year=d["year"],
                top_field=d["top_field"],
                subfield=d.get("subfield"),
            )
        except KeyError as exc:
            raise DataFormatError(f"missing field {exc.args[0]!r}") from None
        rec.validate()
        return rec


@dataclass(frozen=True)
class ReferenceList:
    """An ordered bibliography attached to a focal paper.

    ``source`` records who wrote the list: the original authors
    (``ground_truth``), a text generator (``generated:<name>``) or a shuffle
    (``baseline:<kind>``).  Slots are meaningful for baselines, which permute
    references between slots while conserving per-focal counts.
    """

    focal_id: str
    source: str
    refs: tuple[str, ...]

    def validate(self) -> None:
        if not self.focal_id:
            raise DataFormatError("field 'focal_id' must be a nonempty string")
        _validate_source(self.source)
        if len(self.refs) == 0:
            raise DataFormatError(f"reference list for {self.focal_id!r} is empty")
        if self.focal_id in self.refs:
            raise DataFormatError(f"reference list for {self.focal_id!r} contains the focal paper itself")
        if len(set(self.refs)) != len(self.refs):
            dupes = sorted({r for r in self.refs if self.refs.count(r) > 1})
            raise DataFormatError(f"reference list for {self.focal_id!r} repeats {dupes}")

    def to_dict(self) -> dict:
        return {"focal_id": self.focal_id, "source": self.source, "refs": list(self.refs)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ReferenceList":
        try:
            lst = cls(focal_id=d["focal_id"], source=d["source"], refs=tuple(d["refs"]))
        except KeyError as exc:
            raise DataFormatError(f"missing field {exc.args[0]!r}") from None
        lst.validate()
        return lst

    @property
    def provenance(self) -> Provenance:
        return Provenance.parse(self.source)


def _validate_source(source: str) -> None:
    if not source:
        raise DataFormatError("field 'source' must be a nonempty string")
    kind, _, name = source.partition(":")
    if kind == "ground_truth" and not name:
        return
    if kind == "generated" and name:
        return
    if kind == "baseline" and name:
        BaselineKind.parse(name)
        return
    raise DataFormatError(
        f"bad source {source!r} (expected 'ground_truth', 'generated:<name>' or 'baseline:<kind>')"
    )


class CitationEdgeSet:
    """Directed citation edges between known papers.

    Stores unique ``(citing, cited)`` pairs and exposes an undirected
    adjacency view used when building graphs.
    """

    def __init__(self, edges: Iterable[tuple[str, str]]):
        pairs = set()
        for citing, cited in edges:
            if citing == cited:
                raise DataFormatError(f"self-citation edge {citing!r} -> {cited!r}")
            pairs.add((citing, cited))
        self._edges = frozenset(pairs)
        self._adjacency: dict[str, set[str]] | None = None

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return self._edges

    def __len__(self) -> int:
        return len(self._edges)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self._edges

    def undirected_neighbors(self, paper_id: str) -> frozenset[str]:
        return frozenset(self._adj().get(paper_id, ()))

    def linked(self, a: str, b: str) -> bool:
        """True when a cites b or b cites a."""
        return b in self._adj().get(a, ())

    def _adj(self) -> dict[str, set[str]]:
        if self._adjacency is None:
            adj: dict[str, set[str]] = {}
            for citing, cited in self._edges:
                adj.setdefault(citing, set()).add(cited)
                adj.setdefault(cited, set()).add(citing)
            self._adjacency = adj
        return self._adjacency


# ------------------------------------------------------------------- dataset


@dataclass(frozen=True)
class Dataset:
    """An immutable bundle of papers, edges and reference lists.

    ``unresolved_refs`` collects reference keys that have no paper record;
    such references are kept (they still occupy slots and may carry
    embeddings) but flagged, and downstream consumers may filter on them.
    """

    papers: Mapping[str, PaperRecord]
    edges: CitationEdgeSet
    reflists: tuple[ReferenceList, ...]
    duplicate_edge_count: int = 0
    _index: Mapping[tuple[str, str], ReferenceList] = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        index: dict[tuple[str, str], ReferenceList] = {}
        for lst in self.reflists:
            key = (lst.focal_id, lst.source)
            if key in index:
                raise DataFormatError(f"duplicate reference list for focal {key[0]!r} and source {key[1]!r}")
            index[key] = lst
        object.__setattr__(self, "_index", index)

    # --- counts and lookups -------------------------------------------------

    @property
    def counts(self) -> tuple[int, int, int]:
        """(papers, edges, reference lists)."""
        return (len(self.papers), len(self.edges), len(self.reflists))

    def paper(self, paper_id: str) -> PaperRecord | None:
        return self.papers.get(paper_id)

    def year(self, paper_id: str) -> int | None:
        rec = self.papers.get(paper_id)
        return None if rec is None else rec.year

    def reflist(self, focal_id: str, source: str) -> ReferenceList | None:
        return self._index.get((focal_id, source))

    def ground_truth_list(self, focal_id: str) -> ReferenceList | None:
        return self.reflist(focal_id, "ground_truth")

    def generated_list(self, focal_id: str, generator: str) -> ReferenceList | None:
        return self.reflist(focal_id, f"generated:{generator}")

    def baseline_list(self, focal_id: str, kind: BaselineKind | str) -> ReferenceList | None:
        kind = kind if isinstance(kind, BaselineKind) else BaselineKind.parse(kind)
        return self.reflist(focal_id, f"baseline:{kind.value}")

    def generators(self) -> tuple[str, ...]:
        names = {lst.source.split(":", 1)[1] for lst in self.reflists if lst.source.startswith("generated:")}
        return tuple(sorted(names))

    def baseline_kinds(self) -> tuple[BaselineKind, ...]:
        kinds = {lst.source.split(":", 1)[1] for lst in self.reflists if lst.source.startswith("baseline:")}
        return tuple(BaselineKind(k) for k in sorted(kinds))

    def focal_ids(self, source: str = "ground_truth") -> tuple[str, ...]:
        return tuple(sorted(lst.focal_id for lst in self.reflists if lst.source == source))

    @property
    def unresolved_refs(self) -> frozenset[str]:
        missing = {r for lst in self.reflists for r in lst.refs if r not in self.papers}
        return frozenset(missing)

    def with_reflists(self, extra: Sequence[ReferenceList]) -> "Dataset":
        """A new dataset with additional reference lists (e.g. fresh baselines)."""
        for lst in extra:
            lst.validate()
        return replace(self, reflists=self.reflists + tuple(extra))


# ---------------------------------------------------------------- the loader


def _read_jsonl(path: Path) -> Iterator[tuple[int, dict]]:
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path.name}:{lineno}: invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise DataFormatError(f"{path.name}:{lineno}: expected a JSON object")
            yield lineno, obj


def load_dataset(papers_path: str | Path, edges_path: str | Path, reflists_path: str | Path) -> Dataset:
    """Load and validate a dataset from its three component files.

    Raises :class:`DataFormatError` (with file and line) on malformed input,
    :class:`DuplicateIdError` on repeated paper ids, and
    :class:`UnresolvedFocalError` when a list's focal paper is unknown.
    Duplicate edge rows are collapsed and counted; self-citations are errors.
    """
    papers_path, edges_path, reflists_path = Path(papers_path), Path(edges_path), Path(reflists_path)

    papers: dict[str, PaperRecord] = {}
    first_line: dict[str, int] = {}
    for lineno, obj in _read_jsonl(papers_path):
        try:
            rec = PaperRecord.from_dict(obj)
        except DataFormatError as exc:
            raise DataFormatError(f"{papers_path.name}:{lineno}: {exc}") from None
        if rec.id in papers:
            raise DuplicateIdError(
                f"{papers_path.name}:{lineno}: paper id {rec.id!r} already defined on line {first_line[rec.id]}"
            )
        papers[rec.id] = rec
        first_line[rec.id] = lineno

    pairs: set[tuple[str, str]] = set()
    duplicates = 0
    with open(edges_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2 or not parts[0] or not parts[1]:
                raise DataFormatError(f"{edges_path.name}:{lineno}: expected 'citing<TAB>cited', got {line!r}")
            citing, cited = parts
            if citing == cited:
                raise DataFormatError(f"{edges_path.name}:{lineno}: self-citation edge for {citing!r}")
            if (citing, cited) in pairs:
                duplicates += 1
            else:
                pairs.add((citing, cited))
    edges = CitationEdgeSet(pairs)

    reflists: list[ReferenceList] = []
    for lineno, obj in _read_jsonl(reflists_path):
        try:
            lst = ReferenceList.from_dict(obj)
        except DataFormatError as exc:
            raise DataFormatError(f"{reflists_path.name}:{lineno}: {exc}") from None
        if lst.focal_id not in papers:
            raise UnresolvedFocalError(
                f"{reflists_path.name}:{lineno}: focal paper {lst.focal_id!r} has no record in {papers_path.name}"
            )
        reflists.append(lst)

    return Dataset(papers=papers, edges=edges, reflists=tuple(reflists), duplicate_edge_count=duplicates)


def load_dataset_dir(directory: str | Path) -> Dataset:
    """Load a dataset directory using the fixed file names."""
    d = Path(directory)
    return load_dataset(d / PAPERS_FILE, d / EDGES_FILE, d / REFLISTS_FILE)


def save_dataset(dataset: Dataset, directory: str | Path) -> None:
    """Write papers/edges/reflists back out in the canonical layout."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / PAPERS_FILE, "w", encoding="utf-8") as fh:
        for pid in sorted(dataset.papers):
            fh.write(json.dumps(dataset.papers[pid].to_dict(), sort_keys=True) + "\n")
    with open(d / EDGES_FILE, "w", encoding="utf-8") as fh:
        for citing, cited in sorted(dataset.edges.edges):
            fh.write(f"{citing}\t{cited}\n")
    with open(d / REFLISTS_FILE, "w", encoding="utf-8") as fh:
        for lst in sorted(dataset.reflists, key=lambda l: (l.focal_id, l.source)):
            fh.write(json.dumps(lst.to_dict(), sort_keys=True) + "\n")


# ----------------------------------------------------------------- embeddings


class EmbeddingTable:
    """Read-only map from paper id to a float64 vector of fixed dimension."""

    def __init__(self, vectors: Mapping[str, np.ndarray], dim: int):
        self._vectors = {k: np.asarray(v, dtype=np.float64) for k, v in vectors.items()}
        self.dim = int(dim)
        for pid, vec in self._vectors.items():
            if vec.shape != (self.dim,):
                raise DimensionMismatchError(f"embedding for {pid!r} has shape {vec.shape}, expected ({self.dim},)")
            if not np.all(np.isfinite(vec)):
                raise NonFiniteError(f"embedding for {pid!r} contains non-finite values")

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._vectors))

    def vector(self, paper_id: str) -> np.ndarray:
        try:
            return self._vectors[paper_id]
        except KeyError:
            raise MissingEmbeddingError(f"no embedding for paper {paper_id!r}") from None

    def get(self, paper_id: str) -> np.ndarray | None:
        return self._vectors.get(paper_id)

    def missing(self, ids: Iterable[str]) -> tuple[str, ...]:
        """Ids from ``ids`` that have no vector, sorted."""
        return tuple(sorted(i for i in set(ids) if i not in self._vectors))

    def matrix(self, ids: Sequence[str]) -> np.ndarray:
        """Stack vectors for ``ids`` (missing ids raise) into an (n, dim) array."""
        if not ids:
            return np.zeros((0, self.dim))
        return np.stack([self.vector(i) for i in ids])


def load_embeddings(path: str | Path, expected_dim: int | None = None) -> EmbeddingTable:
    """Load an embeddings file, checking dimension and finiteness per id."""
    path = Path(path)
    vectors: dict[str, np.ndarray] = {}
    dim = expected_dim
    for lineno, obj in _read_jsonl(path):
        try:
            pid, vec = obj["id"], obj["vec"]
        except KeyError as exc:
            raise DataFormatError(f"{path.name}:{lineno}: missing field {exc.args[0]!r}") from None
        arr = np.asarray(vec, dtype=np.float64)
        if arr.ndim != 1:
            raise DataFormatError(f"{path.name}:{lineno}: 'vec' must be a flat list of numbers")
        if dim is None:
            dim = arr.shape[0]
        if arr.shape[0] != dim:
            raise DimensionMismatchError(
                f"{path.name}:{lineno}: embedding for {pid!r} has length {arr.shape[0]}, expected {dim}"
            )
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError(f"{path.name}:{lineno}: embedding for {pid!r} contains non-finite values")
        if pid in vectors:
            raise DuplicateIdError(f"{path.name}:{lineno}: embedding for {pid!r} already defined")
        vectors[pid] = arr
    if dim is None:
        raise DataFormatError(f"{path.name}: no embeddings found")
    return EmbeddingTable(vectors, dim)


def save_embeddings(table: EmbeddingTable, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for pid in table.ids():
            fh.write(json.dumps({"id": pid, "vec": table.vector(pid).tolist()}) + "\n")


class EmbeddingProvider(Protocol):
    """Anything that can produce an embedding for (paper id, text)."""

    def fetch(self, paper_id: str, text: str) -> np.ndarray:  # pragma: no cover - protocol
        ...


class FileEmbeddingProvider:
    """Provider backed by a loaded :class:`EmbeddingTable`; ignores ``text``."""

    def __init__(self, table: EmbeddingTable):
        self.table = table

    def fetch(self, paper_id: str, text: str = "") -> np.ndarray:
        return self.table.vector(paper_id)
