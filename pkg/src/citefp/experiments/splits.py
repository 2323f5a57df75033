"""Stratified train/validation/test splits over focal papers.

Splitting happens at the focal level: every graph derived from a focal
(ground truth, generated, baseline) lands in the same fold, so a model
never sees the same bibliography on both sides of a fold boundary.

Fold sizes honour the requested fractions exactly at the global level
(largest-remainder apportionment, so each fold is within one item of
``fraction * n``), and approximately within each stratum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .. import seeding
from ..errors import InsufficientDataError


@dataclass(frozen=True)
class SplitPlan:
    """Fractions for (train, val, test) plus the seed that fixes the draw."""

    fractions: tuple[float, float, float] = (0.70, 0.15, 0.15)
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.fractions) != 3:
            raise ValueError("fractions must have three entries")
        if any(f < 0 for f in self.fractions):
            raise ValueError("fractions must be non-negative")
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {sum(self.fractions)!r}")


@dataclass(frozen=True)
class Splits:
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def fold_of(self) -> dict[str, str]:
        out: dict[str, str] = {}
        for name in ("train", "val", "test"):
            for item in getattr(self, name):
                out[item] = name
        return out

    @property
    def sizes(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.val), len(self.test))


def _apportion(n: int, fractions: tuple[float, float, float]) -> list[int]:
    """Largest-remainder apportionment of ``n`` items into three folds.

    Ties in the remainders go to the earlier fold, so the result is
    deterministic. Each count differs from ``n * fraction`` by less than 1.
    """
    exact = [n * f for f in fractions]
    counts = [math.floor(e) for e in exact]
    leftover = n - sum(counts)
    order = sorted(range(3), key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:leftover]:
        counts[i] += 1
    return counts


def make_splits(
    ids: list[str] | tuple[str, ...],
    strata: dict[str, str],
    plan: SplitPlan = SplitPlan(),
) -> Splits:
    """Split ``ids`` into train/val/test, stratified by ``strata[id]``.

    Each stratum is apportioned independently, then a correction pass
    moves individual items between folds until the global fold sizes
    match the largest-remainder targets for the full id list. The
    correction disturbs each stratum by at most a few items, so the
    per-stratum mix stays close to the requested fractions.
    """
    ids = list(ids)
    if len(set(ids)) != len(ids):
        raise ValueError("split ids must be unique")
    if not ids:
        raise InsufficientDataError("cannot split an empty id list")
    missing = [i for i in ids if i not in strata]
    if missing:
        raise KeyError(f"no stratum for id {missing[0]!r}")

    groups: dict[str, list[str]] = {}
    for item in sorted(ids):
        groups.setdefault(strata[item], []).append(item)

    folds: list[list[str]] = [[], [], []]
    for key in sorted(groups):
        members = list(groups[key])
        rng = seeding.generator(plan.seed, "split", key)
        rng.shuffle(members)
        counts = _apportion(len(members), plan.fractions)
        start = 0
        for fold_idx, count in enumerate(counts):
            folds[fold_idx].extend(members[start : start + count])
            start += count

    # Correction pass: per-stratum rounding can leave the global folds a
    # few items off target; move surplus items into deficit folds.
    targets = _apportion(len(ids), plan.fractions)
    rng = seeding.generator(plan.seed, "split", "correction")
    for src in range(3):
        while len(folds[src]) > targets[src]:
            dst = next(d for d in range(3) if len(folds[d]) < targets[d])
            pick = int(rng.integers(0, len(folds[src])))
            folds[dst].append(folds[src].pop(pick))

    for fold, frac in zip(folds, plan.fractions):
        if frac > 0 and not fold:
            raise InsufficientDataError(
                f"{len(ids)} ids are too few to fill a fraction-{frac} fold"
            )
    return Splits(train=tuple(folds[0]), val=tuple(folds[1]), test=tuple(folds[2]))
