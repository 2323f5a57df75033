"""Synthetic citation corpora with a planted authenticity signal.

The generator builds a corpus of focal papers, their real reference
clusters, and machine-suggested reference lists that imitate the
statistical fingerprint this package is designed to detect:

* every focal paper has a topic vector near its field's center; real
  references embed tightly around that topic and are wired into a small
  citation cluster (hub-biased attachment plus triadic closure);
* suggested reference lists reuse a fraction of the real references and
  invent the rest; invented references share a common off-topic drift
  direction (with a small per-generator tilt), a subset of them is left
  unwired so they end up isolated, and a few carry publication years
  later than the focal paper;
* shuffle baselines can be appended so a dataset is ready for paired
  analyses straight out of the generator.

Everything is derived from one root seed through named substreams, so a
given parameter set always produces byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import seeding
from ..baselines import field_shuffle
from ..data import (
    EMBEDDINGS_FILE,
    CitationEdgeSet,
    Dataset,
    EmbeddingTable,
    PaperRecord,
    ReferenceList,
    save_dataset,
    save_embeddings,
)

YEAR_FLOOR = 1800
YEAR_CEIL = 2100


@dataclass(frozen=True)
class SynthParams:
    """Knobs for the synthetic corpus.

    ``drift`` moves invented references away from the focal topic along a
    direction shared across focal papers; ``share_frac`` controls how many
    suggested references are real ones; ``isolated_frac`` is the share of
    invented references deliberately left without cluster edges.
    """

    n_focals: int = 200
    dim: int = 48
    seed: int = 0
    generators: tuple[str, ...] = ("alpha",)
    n_fields: int = 4
    subfields_per_field: int = 3
    ref_range: tuple[int, int] = (4, 14)
    share_frac: float = 0.35
    drift: float = 0.75
    generator_tilt: float = 0.25
    topic_spread: float = 0.9
    focal_noise: float = 0.25
    ref_noise: float = 0.55
    isolated_extra_noise: float = 0.35
    isolated_frac: float = 0.29
    gt_isolated_frac: float = 0.18
    attach_mean: float = 1.6
    gen_attach_mean: float | None = 1.8
    closure_prob: float = 0.35
    year_range: tuple[int, int] = (1999, 2021)
    postdate_frac: float = 0.05
    missing_meta_frac: float = 0.0
    baseline_kinds: tuple[str, ...] = ("field",)
    baseline_seed: int = 0

    def __post_init__(self) -> None:
        if self.n_focals < 1:
            raise ValueError("n_focals must be positive")
        if self.dim < 2:
            raise ValueError("dim must be at least 2")
        if not self.generators or len(set(self.generators)) != len(self.generators):
            raise ValueError("generators must be nonempty and unique")
        lo, hi = self.ref_range
        if lo < 2 or hi < lo:
            raise ValueError("ref_range must satisfy 2 <= lo <= hi")
        if not (0.0 <= self.share_frac < 1.0):
            raise ValueError("share_frac must lie in [0, 1)")
        if not (0.0 <= self.isolated_frac <= 1.0):
            raise ValueError("isolated_frac must lie in [0, 1]")
        if not (0.0 <= self.gt_isolated_frac <= 1.0):
            raise ValueError("gt_isolated_frac must lie in [0, 1]")
        if not (0.0 <= self.postdate_frac <= 1.0):
            raise ValueError("postdate_frac must lie in [0, 1]")
        if not (0.0 <= self.missing_meta_frac < 1.0):
            raise ValueError("missing_meta_frac must lie in [0, 1)")
        if self.year_range[0] < YEAR_FLOOR + 15 or self.year_range[1] > YEAR_CEIL - 5:
            raise ValueError("year_range leaves no room for reference lags")
        if self.year_range[0] > self.year_range[1]:
            raise ValueError("year_range must be ordered")


def _unit(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.standard_normal(dim)
    norm = float(np.linalg.norm(v))
    while norm < 1e-12:  # pragma: no cover - essentially impossible
        v = rng.standard_normal(dim)
        norm = float(np.linalg.norm(v))
    return v / norm


def _normalize(v: np.ndarray) -> np.ndarray:
    return v / float(np.linalg.norm(v))


def _cluster_edges(
    members,
    rng: np.random.Generator,
    attach_mean: float,
    closure_prob: float,
    min_attach: int,
    skip_within: frozenset[str] = frozenset(),
) -> set[tuple[str, str]]:
    """Wire ``members`` with hub-biased attachment and triadic closure.

    Nodes arrive in random order; each newcomer draws a Poisson number of
    attachment attempts (at least ``min_attach``) toward earlier nodes with
    probability proportional to degree + 1, then may close a triangle
    through a random neighbor. Pairs lying entirely inside ``skip_within``
    are never added (used to avoid re-wiring already-linked real references).
    """
    members = list(members)
    if len(members) < 2:
        return set()
    order = list(members)
    rng.shuffle(order)
    degree = {v: 0 for v in order}
    neigh: dict[str, list[str]] = {v: [] for v in order}
    edges: set[tuple[str, str]] = set()

    def _add(a: str, b: str) -> None:
        if a == b or (a in skip_within and b in skip_within):
            return
        e = (a, b) if a < b else (b, a)
        if e in edges:
            return
        edges.add(e)
        degree[a] += 1
        degree[b] += 1
        neigh[a].append(b)
        neigh[b].append(a)

    for j in range(1, len(order)):
        v = order[j]
        attempts = min(j, max(min_attach, int(rng.poisson(attach_mean))))
        prev = order[:j]
        for _ in range(attempts):
            weights = np.array([degree[u] + 1.0 for u in prev])
            u = prev[int(rng.choice(j, p=weights / weights.sum()))]
            _add(u, v)
        if neigh[v] and rng.random() < closure_prob:
            through = neigh[v][int(rng.integers(0, len(neigh[v])))]
            candidates = [w for w in neigh[through] if w != v]
            if candidates:
                _add(v, candidates[int(rng.integers(0, len(candidates)))])
    return edges


def generate(params: SynthParams, out_dir: str | Path | None = None) -> tuple[Dataset, EmbeddingTable]:
    """Build a synthetic dataset (papers, edges, reference lists, embeddings).

    Returns the in-memory dataset and embedding table; when ``out_dir`` is
    given, also writes the four dataset files there.
    """
    dim = params.dim
    field_rng = seeding.generator(params.seed, "synth", "fields")
    bases = [_unit(field_rng, dim) for _ in range(params.n_fields)]
    common_drift = _unit(field_rng, dim)
    gen_dirs = {
        name: _normalize(common_drift + params.generator_tilt * _unit(field_rng, dim))
        for name in params.generators
    }

    papers: dict[str, PaperRecord] = {}
    years: dict[str, int] = {}
    vectors: dict[str, np.ndarray] = {}
    directed: set[tuple[str, str]] = set()
    reflists: list[ReferenceList] = []

    def _cite(a: str, b: str) -> None:
        """Record an undirected relation as a year-ordered citation."""
        ya, yb = years[a], years[b]
        if ya > yb or (ya == yb and a > b):
            directed.add((a, b))
        else:
            directed.add((b, a))

    lo, hi = params.ref_range
    y0, y1 = params.year_range
    gen_attach = params.attach_mean if params.gen_attach_mean is None else params.gen_attach_mean

    for i in range(params.n_focals):
        rng = seeding.generator(params.seed, "synth", "focal", i)
        focal_id = f"p{i:05d}"
        field_idx = i % params.n_fields
        field = f"f{field_idx:02d}"
        subfield = f"{field}.s{int(rng.integers(0, params.subfields_per_field))}"
        year = int(y0 + rng.integers(0, y1 - y0 + 1))
        topic = _normalize(bases[field_idx] + params.topic_spread * _unit(rng, dim))

        papers[focal_id] = PaperRecord(
            id=focal_id,
            title=f"Study {i} in {subfield}",
            year=year,
            top_field=field,
            subfield=subfield,
            abstract=f"Synthetic focal paper {i}.",
        )
        years[focal_id] = year
        vectors[focal_id] = _normalize(topic + params.focal_noise * _unit(rng, dim))

        n_refs = int(rng.integers(lo, hi + 1))
        gt_ids = [f"{focal_id}.g{j:02d}" for j in range(n_refs)]
        for rid in gt_ids:
            ref_year = max(YEAR_FLOOR, year - int(rng.integers(1, 13)))
            papers[rid] = PaperRecord(
                id=rid,
                title=f"Reference {rid}",
                year=ref_year,
                top_field=field,
                subfield=subfield,
            )
            years[rid] = ref_year
            vectors[rid] = _normalize(topic + params.ref_noise * _unit(rng, dim))
            _cite(focal_id, rid)
        # Both sides use the same wiring process; the only structural
        # asymmetry between real and suggested lists is the share of
        # references left unwired (slightly higher on the suggested side).
        gt_iso_order = list(gt_ids)
        rng.shuffle(gt_iso_order)
        gt_wired = sorted(set(gt_ids) - set(gt_iso_order[: int(round(params.gt_isolated_frac * n_refs))]))
        for a, b in sorted(_cluster_edges(gt_wired, rng, params.attach_mean, params.closure_prob, min_attach=1)):
            _cite(a, b)
        reflists.append(ReferenceList(focal_id=focal_id, source="ground_truth", refs=tuple(gt_ids)))

        for gen_name in params.generators:
            grng = seeding.generator(params.seed, "synth", "focal", i, gen_name)
            n_gen = n_refs
            k_shared = min(int(round(params.share_frac * n_gen)), n_refs, n_gen - 1)
            shared = [gt_ids[j] for j in sorted(grng.choice(n_refs, size=k_shared, replace=False))]
            new_ids = [f"{focal_id}.{gen_name}{j:02d}" for j in range(n_gen - k_shared)]
            n_iso = int(round(params.isolated_frac * len(new_ids)))
            iso_order = list(new_ids)
            grng.shuffle(iso_order)
            isolated = set(iso_order[:n_iso])

            for rid in new_ids:
                if grng.random() < params.postdate_frac:
                    ref_year = min(YEAR_CEIL, year + int(grng.integers(1, 4)))
                else:
                    ref_year = max(YEAR_FLOOR, year - int(grng.integers(1, 13)))
                papers[rid] = PaperRecord(
                    id=rid,
                    title=f"Reference {rid}",
                    year=ref_year,
                    top_field=field,
                    subfield=subfield,
                )
                years[rid] = ref_year
                noise = params.ref_noise + (params.isolated_extra_noise if rid in isolated else 0.0)
                vectors[rid] = _normalize(
                    topic + params.drift * gen_dirs[gen_name] + noise * _unit(grng, dim)
                )

            wired = shared + [r for r in new_ids if r not in isolated]
            cluster = _cluster_edges(
                wired, grng, gen_attach, params.closure_prob, min_attach=1, skip_within=frozenset(shared)
            )
            for a, b in sorted(cluster):
                _cite(a, b)
            suggestion = shared + new_ids
            grng.shuffle(suggestion)
            reflists.append(
                ReferenceList(focal_id=focal_id, source=f"generated:{gen_name}", refs=tuple(suggestion))
            )

    if params.missing_meta_frac > 0:
        strip_rng = seeding.generator(params.seed, "synth", "strip")
        focal_ids = {f"p{i:05d}" for i in range(params.n_focals)}
        for pid in sorted(papers):
            if pid not in focal_ids and strip_rng.random() < params.missing_meta_frac:
                del papers[pid]

    dataset = Dataset(papers=papers, edges=CitationEdgeSet(directed), reflists=tuple(reflists))
    if params.baseline_kinds:
        extra: list[ReferenceList] = []
        for kind in params.baseline_kinds:
            extra.extend(field_shuffle(dataset, kind, seed=params.baseline_seed).lists)
        dataset = dataset.with_reflists(extra)
    table = EmbeddingTable(vectors, dim=dim)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        save_dataset(dataset, out)
        save_embeddings(table, out / EMBEDDINGS_FILE)
    return dataset, table
