"""Degree-preserving reference shuffles.

A shuffle reassigns ground-truth references between focal papers inside a
stratum, conserving each focal's reference count and the stratum's reference
multiset exactly.  Three kinds:

* ``field`` — strata are the focal papers' top-level fields
* ``subfield`` — strata are (field, subfield); subfield strata with a pool
  smaller than ``min_subfield_pool`` fall back to their parent field stratum
* ``temporal`` — field strata, plus the constraint that a reference may only
  land on a focal published no earlier than the reference

Uniform kinds draw one permutation of the stratum pool, then repair the rare
slots that violate the reference-list invariants (a focal may not receive its
own id, nor the same reference twice) by swapping with compatible slots —
swaps keep the multiset intact.  The temporal kind processes slots in
ascending year-ceiling order, drawing uniformly among still-valid pool items,
with chronological backtracking; a stratum with no valid assignment raises
:class:`StratumInfeasibleError`.

Strata are independent: each one draws from a child seed derived from
``(seed, kind, stratum key)``, so outputs do not depend on processing order.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import seeding
from .data import BaselineKind, Dataset, ReferenceList
from .errors import StratumInfeasibleError

__all__ = [
    "FieldStratum",
    "ShuffleResult",
    "build_strata",
    "field_shuffle",
    "temporal_assignment",
    "year_violation_fraction",
]

_REPAIR_PASSES = 50
_BACKTRACK_BUDGET = 500_000


@dataclass(frozen=True)
class FieldStratum:
    """One shuffle unit: slots to fill and the pool that fills them.

    ``slots`` holds ``(focal_id, year_ceiling)`` per original reference slot;
    ``pool`` holds ``(reference_id, year)`` with the same multiset of
    references the slots originally carried.  ``|slots| == |pool|`` always.
    Years may be ``None`` for metadata-missing papers; a missing pool year
    never blocks a temporal assignment (treated as arbitrarily old), while
    ceilings always exist because focal papers must resolve.
    """

    key: str
    slots: tuple[tuple[str, int | None], ...]
    pool: tuple[tuple[str, int | None], ...]

    def __post_init__(self) -> None:
        if len(self.slots) != len(self.pool):
            raise ValueError(f"stratum {self.key!r}: {len(self.slots)} slots vs {len(self.pool)} pool items")

    @property
    def size(self) -> int:
        return len(self.pool)


@dataclass(frozen=True)
class ShuffleResult:
    kind: BaselineKind
    lists: tuple[ReferenceList, ...]
    pool_sizes: dict[str, int]


def build_strata(
    dataset: Dataset, kind: BaselineKind, min_subfield_pool: int = 30
) -> tuple[FieldStratum, ...]:
    """Group every ground-truth reference slot into its shuffle stratum."""
    groups: dict[str, tuple[list, list]] = {}
    gt_lists = sorted(
        (l for l in dataset.reflists if l.source == "ground_truth"), key=lambda l: l.focal_id
    )
    for lst in gt_lists:
        focal = dataset.papers[lst.focal_id]
        if kind is BaselineKind.SUBFIELD and focal.subfield:
            key = f"subfield:{focal.top_field}/{focal.subfield}"
        else:
            key = f"field:{focal.top_field}"
        slots, pool = groups.setdefault(key, ([], []))
        for ref in lst.refs:
            slots.append((lst.focal_id, focal.year))
            pool.append((ref, dataset.year(ref)))

    if kind is BaselineKind.SUBFIELD:
        merged: dict[str, tuple[list, list]] = {}
        small: list[tuple[str, list, list]] = []
        for key, (slots, pool) in groups.items():
            if key.startswith("subfield:") and len(pool) < min_subfield_pool:
                small.append((key, slots, pool))
            else:
                merged[key] = (slots, pool)
        for key, slots, pool in small:
            parent = "field:" + key.split(":", 1)[1].split("/", 1)[0]
            pslots, ppool = merged.setdefault(parent, ([], []))
            pslots.extend(slots)
            ppool.extend(pool)
        groups = merged

    return tuple(
        FieldStratum(key=key, slots=tuple(slots), pool=tuple(pool))
        for key, (slots, pool) in sorted(groups.items())
    )


def field_shuffle(
    dataset: Dataset,
    kind: BaselineKind | str,
    seed: int,
    min_subfield_pool: int = 30,
    exclude_self: bool = True,
) -> ShuffleResult:
    """Shuffle every stratum and emit one baseline reference list per focal.

    Output lists carry source ``baseline:<kind>`` and satisfy all reference
    list invariants; per-focal counts and per-stratum multisets are conserved
    exactly.
    """
    kind = kind if isinstance(kind, BaselineKind) else BaselineKind.parse(kind)
    strata = build_strata(dataset, kind, min_subfield_pool=min_subfield_pool)
    per_focal: dict[str, list[str]] = {}
    pool_sizes: dict[str, int] = {}
    for stratum in strata:
        pool_sizes[stratum.key] = stratum.size
        rng = seeding.generator(seed, "baseline", kind.value, stratum.key)
        if kind is BaselineKind.TEMPORAL:
            assigned = temporal_assignment(stratum, rng, exclude_self=exclude_self)
        else:
            assigned = _uniform_assignment(stratum, rng, exclude_self=exclude_self)
        for (focal, _), ref in zip(stratum.slots, assigned):
            per_focal.setdefault(focal, []).append(ref)

    lists = tuple(
        ReferenceList(focal_id=focal, source=f"baseline:{kind.value}", refs=tuple(refs))
        for focal, refs in sorted(per_focal.items())
    )
    for lst in lists:
        lst.validate()
    return ShuffleResult(kind=kind, lists=lists, pool_sizes=pool_sizes)


# ------------------------------------------------------- uniform permutation


def _fits(item: str, focal: str, held: Counter, exclude_self: bool) -> bool:
    if exclude_self and item == focal:
        return False
    return held[(focal, item)] == 0


def _uniform_assignment(stratum: FieldStratum, rng: np.random.Generator, exclude_self: bool) -> list[str]:
    n = stratum.size
    items = [ref for ref, _ in stratum.pool]
    focals = [focal for focal, _ in stratum.slots]
    perm = rng.permutation(n)
    assigned = [items[perm[i]] for i in range(n)]

    held: Counter = Counter()
    for focal, item in zip(focals, assigned):
        held[(focal, item)] += 1

    def violating(i: int) -> bool:
        focal, item = focals[i], assigned[i]
        if exclude_self and item == focal:
            return True
        return held[(focal, item)] > 1

    for _ in range(_REPAIR_PASSES):
        bad = [i for i in range(n) if violating(i)]
        if not bad:
            return assigned
        progress = False
        for i in bad:
            if not violating(i):
                continue
            for j in rng.permutation(n):
                if i == j:
                    continue
                fi, fj = focals[i], focals[j]
                a, b = assigned[i], assigned[j]
                held[(fi, a)] -= 1
                held[(fj, b)] -= 1
                if _fits(b, fi, held, exclude_self) and _fits(a, fj, held, exclude_self):
                    assigned[i], assigned[j] = b, a
                    held[(fi, b)] += 1
                    held[(fj, a)] += 1
                    progress = True
                    break
                held[(fi, a)] += 1
                held[(fj, b)] += 1
        if not progress:
            break
    if not any(violating(i) for i in range(n)):
        return assigned
    raise StratumInfeasibleError(
        f"stratum {stratum.key!r}: could not repair duplicate/self assignments "
        f"after {_REPAIR_PASSES} passes"
    )


# ------------------------------------------------------- temporal assignment


def temporal_assignment(
    stratum: FieldStratum, rng: np.random.Generator, exclude_self: bool = True
) -> list[str]:
    """Assign pool items to slots so no reference post-dates its focal.

    Slots are processed in ascending ceiling order; each draws uniformly
    among still-valid items (year within ceiling, no self-reference, no
    duplicate within the focal), with chronological backtracking on dead
    ends.  Returns assignments in the stratum's original slot order.
    """
    n = stratum.size
    order = sorted(range(n), key=lambda i: (stratum.slots[i][1], i))
    pool_order = sorted(range(n), key=lambda j: (_year_key(stratum.pool[j][1]), j))

    # Hall feasibility check on years alone: pair sorted years with sorted
    # ceilings; the i-th smallest year must fit the i-th smallest ceiling.
    for i, (slot_idx, pool_idx) in enumerate(zip(order, pool_order)):
        ceiling = stratum.slots[slot_idx][1]
        year = stratum.pool[pool_idx][1]
        if year is not None and ceiling is not None and year > ceiling:
            raise StratumInfeasibleError(
                f"stratum {stratum.key!r}: no temporal assignment exists "
                f"({i + 1} slots with ceiling <= {ceiling} but only {i} pool items that old)"
            )

    items = [stratum.pool[j][0] for j in pool_order]
    years = [_year_key(stratum.pool[j][1]) for j in pool_order]

    used = [False] * n
    held: Counter = Counter()
    assigned_sorted: list[int] = []  # pool index (into items) chosen per processed slot
    candidates: list[list[int]] = []  # per processed slot: remaining untried candidates
    steps = 0
    pos = 0
    while pos < len(order):
        slot_idx = order[pos]
        focal = stratum.slots[slot_idx][0]
        ceiling = stratum.slots[slot_idx][1]
        if pos == len(candidates):
            valid = [
                j
                for j in range(n)
                if not used[j]
                and (ceiling is None or years[j] <= ceiling)
                and _fits(items[j], focal, held, exclude_self)
            ]
            rng.shuffle(valid)
            candidates.append(valid)
        steps += 1
        if steps > _BACKTRACK_BUDGET:
            raise StratumInfeasibleError(
                f"stratum {stratum.key!r}: temporal assignment exceeded the backtracking budget"
            )
        if candidates[pos]:
            j = candidates[pos].pop()
            used[j] = True
            held[(focal, items[j])] += 1
            assigned_sorted.append(j)
            pos += 1
        else:
            candidates.pop()
            if pos == 0 or not assigned_sorted:
                raise StratumInfeasibleError(
                    f"stratum {stratum.key!r}: exhaustive backtracking found no valid temporal assignment"
                )
            pos -= 1
            j = assigned_sorted.pop()
            prev_focal = stratum.slots[order[pos]][0]
            used[j] = False
            held[(prev_focal, items[j])] -= 1

    out = [""] * n
    for slot_pos, j in zip(order, assigned_sorted):
        out[slot_pos] = items[j]
    return out


def _year_key(year: int | None) -> float:
    return -np.inf if year is None else float(year)


# ------------------------------------------------------------------ checks


def year_violation_fraction(dataset: Dataset, lists: Sequence[ReferenceList]) -> float:
    """Fraction of (focal, reference) pairs where the reference post-dates the focal.

    Pairs with an unknown reference year are excluded from the denominator.
    """
    total = violations = 0
    for lst in lists:
        focal_year = dataset.year(lst.focal_id)
        if focal_year is None:
            continue
        for ref in lst.refs:
            ref_year = dataset.year(ref)
            if ref_year is None:
                continue
            total += 1
            if ref_year > focal_year:
                violations += 1
    return violations / total if total else 0.0
