"""Deterministic training loop: Adam, early stopping on validation accuracy.

The optimizer is Adam (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) with decoupled
weight decay.  Each epoch shuffles the training order (batches are capped at
the set size), evaluates validation accuracy with dropout off, and tracks the
best epoch; training stops after ``patience`` epochs without improvement or
at ``max_epochs``, and the returned model carries the best-epoch parameters.
All randomness (init, batch order, dropout) derives from the config seed, so
identical (config, data) give bitwise-identical trajectories.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import seeding
from ..errors import DegenerateLabelsError, TrainingFailure
from .autograd import Tensor, bce_with_logits
from .batching import GraphTensors
from .layers import GnnConfig, GnnModel

__all__ = ["Adam", "TrainResult", "train", "predict_logits", "predict_labels", "accuracy_on"]


class Adam:
    """Adam with decoupled weight decay applied after the adaptive step."""

    def __init__(
        self,
        params: list[Tensor],
        learning_rate: float,
        weight_decay: float = 0.0,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.params = params
        self.lr = learning_rate
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.t = 0

    def step(self) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1**self.t
        b2c = 1.0 - self.beta2**self.t
        for i, p in enumerate(self.params):
            g = p.grad if p.grad is not None else np.zeros_like(p.data)
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g
            p.data -= self.lr * (self.m[i] / b1c) / (np.sqrt(self.v[i] / b2c) + self.eps)
            if self.weight_decay:
                p.data -= self.lr * self.weight_decay * p.data


@dataclass
class TrainResult:
    model: GnnModel
    best_epoch: int
    best_val_accuracy: float
    epochs_run: int
    stopped_early: bool
    history: list[tuple[int, float, float]]  # (epoch, mean train loss, val accuracy)


def predict_logits(model: GnnModel, data: GraphTensors) -> np.ndarray:
    return model.forward(data, training=False).data


def predict_labels(model: GnnModel, data: GraphTensors) -> np.ndarray:
    return (predict_logits(model, data) > 0.0).astype(np.int64)


def accuracy_on(model: GnnModel, data: GraphTensors) -> float:
    return float(np.mean(predict_labels(model, data) == data.labels))


def train(config: GnnConfig, train_set: GraphTensors, val_set: GraphTensors) -> TrainResult:
    """Train a fresh model on ``train_set``, early-stopping on ``val_set``.

    Raises :class:`TrainingFailure` (with the epoch) on non-finite loss or
    gradients, and :class:`DegenerateLabelsError` when the training labels
    are single-class.
    """
    if len(np.unique(train_set.labels)) < 2:
        raise DegenerateLabelsError("training set must contain both classes")
    if train_set.input_dim != config.input_dim:
        raise ValueError(f"config.input_dim = {config.input_dim} but data has {train_set.input_dim}")

    model = GnnModel(config)
    optimizer = Adam(model.parameters(), config.learning_rate, config.weight_decay)
    order_rng = seeding.generator(config.seed, "batch-order")
    dropout_rng = seeding.generator(config.seed, "dropout")

    n = train_set.n_graphs
    batch_size = min(config.batch_size, n)
    best_state = model.get_state()
    best_acc = -1.0
    best_epoch = -1
    since_improved = 0
    history: list[tuple[int, float, float]] = []
    epochs_run = 0
    stopped_early = False

    for epoch in range(config.max_epochs):
        epochs_run = epoch + 1
        perm = order_rng.permutation(n)
        losses = []
        for start in range(0, n, batch_size):
            batch = train_set.subset(perm[start : start + batch_size])
            logits = model.forward(batch, training=True, dropout_rng=dropout_rng)
            loss = bce_with_logits(logits, batch.labels)
            if not np.isfinite(loss.data):
                raise TrainingFailure(f"non-finite loss at epoch {epoch}", epoch=epoch)
            model.zero_grad()
            loss.backward()
            for p in model.parameters():
                if p.grad is not None and not np.all(np.isfinite(p.grad)):
                    raise TrainingFailure(f"non-finite gradient at epoch {epoch}", epoch=epoch)
            optimizer.step()
            losses.append(float(loss.data))
        val_acc = accuracy_on(model, val_set)
        history.append((epoch, float(np.mean(losses)), val_acc))
        if val_acc > best_acc:
            best_acc = val_acc
            best_epoch = epoch
            best_state = model.get_state()
            since_improved = 0
        else:
            since_improved += 1
            if since_improved >= config.patience:
                stopped_early = True
                break

    model.set_state(best_state)
    return TrainResult(
        model=model,
        best_epoch=best_epoch,
        best_val_accuracy=best_acc,
        epochs_run=epochs_run,
        stopped_early=stopped_early,
        history=history,
    )
