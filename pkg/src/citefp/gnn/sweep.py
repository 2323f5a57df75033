"""Random hyperparameter search over the training configuration.

Each trial samples independently and uniformly: hidden dimension from
{32, 64, 128}, layer count from {1..4}, learning rate from [1e-4, 1e-2] on a
linear scale, dropout from [0, 0.5], weight decay from [0, 0.01], and batch
size from {8000, 10000, 13000}.  Trials that fail to train are recorded and
skipped; the best trial maximizes validation accuracy with ties going to the
earlier trial index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import seeding
from ..errors import CitefpError, NoSuccessfulTrialError
from .batching import GraphTensors
from .layers import GnnConfig
from .train import TrainResult, train

__all__ = ["SearchSpace", "SweepTrial", "SweepResult", "random_search"]


@dataclass(frozen=True)
class SearchSpace:
    hidden_dims: tuple[int, ...] = (32, 64, 128)
    n_layers: tuple[int, ...] = (1, 2, 3, 4)
    learning_rate: tuple[float, float] = (1e-4, 1e-2)
    dropout: tuple[float, float] = (0.0, 0.5)
    weight_decay: tuple[float, float] = (0.0, 0.01)
    batch_sizes: tuple[int, ...] = (8000, 10000, 13000)


@dataclass(frozen=True)
class SweepTrial:
    index: int
    config: GnnConfig
    status: str  # "ok" or "failed: <reason>"
    val_accuracy: float  # nan when failed
    epochs_run: int


@dataclass(frozen=True)
class SweepResult:
    arch: str
    trials: tuple[SweepTrial, ...]
    best_index: int

    @property
    def best(self) -> SweepTrial:
        return self.trials[self.best_index]


def sample_config(
    space: SearchSpace, arch: str, input_dim: int, seed: int, trial: int, max_epochs: int = 500
) -> GnnConfig:
    """The trial's configuration, a pure function of (seed, arch, trial)."""
    rng = seeding.generator(seed, "sweep", arch, trial)
    return GnnConfig(
        arch=arch,
        input_dim=input_dim,
        hidden_dim=int(rng.choice(space.hidden_dims)),
        n_layers=int(rng.choice(space.n_layers)),
        learning_rate=float(rng.uniform(*space.learning_rate)),
        dropout=float(rng.uniform(*space.dropout)),
        weight_decay=float(rng.uniform(*space.weight_decay)),
        batch_size=int(rng.choice(space.batch_sizes)),
        max_epochs=max_epochs,
        seed=seeding.derive(seed, "sweep", arch, trial, "train"),
    )


def random_search(
    arch: str,
    train_set: GraphTensors,
    val_set: GraphTensors,
    n_trials: int,
    seed: int,
    space: SearchSpace = SearchSpace(),
    max_epochs: int = 500,
) -> tuple[SweepResult, TrainResult | None]:
    """Run ``n_trials`` independent trials; returns the table and the best run.

    Raises :class:`NoSuccessfulTrialError` when every trial fails.
    """
    if n_trials < 1:
        raise ValueError("n_trials must be positive")
    trials: list[SweepTrial] = []
    best_result: TrainResult | None = None
    best_index = -1
    best_acc = -np.inf
    for t in range(n_trials):
        config = sample_config(space, arch, train_set.input_dim, seed, t, max_epochs=max_epochs)
        try:
            result = train(config, train_set, val_set)
        except CitefpError as exc:
            trials.append(SweepTrial(t, config, f"failed: {exc}", float("nan"), 0))
            continue
        trials.append(SweepTrial(t, config, "ok", result.best_val_accuracy, result.epochs_run))
        if result.best_val_accuracy > best_acc:  # strict: ties keep the earlier trial
            best_acc = result.best_val_accuracy
            best_index = t
            best_result = result
    if best_index < 0:
        raise NoSuccessfulTrialError(f"all {n_trials} sweep trials failed for arch {arch!r}")
    return SweepResult(arch=arch, trials=tuple(trials), best_index=best_index), best_result
