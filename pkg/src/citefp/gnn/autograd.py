"""Reverse-mode automatic differentiation over dense numpy arrays.

A :class:`Tensor` wraps a float64 array and remembers how it was produced;
``backward()`` walks the graph in reverse topological order and accumulates
gradients.  Parameters are 2-D (rows x cols, row-major); activations may
carry a leading batch axis, and broadcasting ops sum gradients back down to
the source shape.  Only the operations the message-passing layers need are
implemented.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

__all__ = ["Tensor", "concat", "masked_softmax", "bce_with_logits", "dropout_mask"]


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def needs_grad(self) -> bool:
        return self.requires_grad or bool(self._parents)

    def _make(self, data: np.ndarray, parents: tuple["Tensor", ...], backward) -> "Tensor":
        out = Tensor(data)
        live = tuple(p for p in parents if p.needs_grad)
        if live:
            out._parents = live
            out._backward = backward
        return out

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self) -> None:
        """Backpropagate from this (scalar) tensor."""
        if self.data.size != 1:
            raise ValueError("backward() expects a scalar loss")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        self.grad = np.ones_like(self.data)
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # ------------------------------------------------------------------ ops

    @staticmethod
    def _wrap(other) -> "Tensor":
        return other if isinstance(other, Tensor) else Tensor(other)

    def __add__(self, other) -> "Tensor":
        other = self._wrap(other)
        def backward(g: np.ndarray) -> None:
            if self.needs_grad:
                self._accumulate(_unbroadcast(g, self.data.shape))
            if other.needs_grad:
                other._accumulate(_unbroadcast(g, other.data.shape))
        return self._make(self.data + other.data, (self, other), backward)

    __radd__ = __add__

    def __mul__(self, other) -> "Tensor":
        other = self._wrap(other)
        def backward(g: np.ndarray) -> None:
            if self.needs_grad:
                self._accumulate(_unbroadcast(g * other.data, self.data.shape))
            if other.needs_grad:
                other._accumulate(_unbroadcast(g * self.data, other.data.shape))
        return self._make(self.data * other.data, (self, other), backward)

    __rmul__ = __mul__

    def __matmul__(self, other) -> "Tensor":
        other = self._wrap(other)
        def backward(g: np.ndarray) -> None:
            if self.needs_grad:
                self._accumulate(_unbroadcast(g @ np.swapaxes(other.data, -1, -2), self.data.shape))
            if other.needs_grad:
                other._accumulate(_unbroadcast(np.swapaxes(self.data, -1, -2) @ g, other.data.shape))
        return self._make(self.data @ other.data, (self, other), backward)

    def relu(self) -> "Tensor":
        mask = self.data > 0
        def backward(g: np.ndarray) -> None:
            self._accumulate(g * mask)
        return self._make(self.data * mask, (self,), backward)

    def leaky_relu(self, alpha: float = 0.2) -> "Tensor":
        slope = np.where(self.data > 0, 1.0, alpha)
        def backward(g: np.ndarray) -> None:
            self._accumulate(g * slope)
        return self._make(self.data * slope, (self,), backward)

    def transpose_last(self) -> "Tensor":
        def backward(g: np.ndarray) -> None:
            self._accumulate(np.swapaxes(g, -1, -2))
        return self._make(np.swapaxes(self.data, -1, -2), (self,), backward)

    def sum_axis(self, axis: int) -> "Tensor":
        def backward(g: np.ndarray) -> None:
            self._accumulate(np.expand_dims(g, axis) * np.ones_like(self.data))
        return self._make(self.data.sum(axis=axis), (self,), backward)

    def reshape(self, *shape: int) -> "Tensor":
        old = self.data.shape
        def backward(g: np.ndarray) -> None:
            self._accumulate(g.reshape(old))
        return self._make(self.data.reshape(*shape), (self,), backward)


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    sizes = [t.data.shape[axis] for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    def backward(g: np.ndarray) -> None:
        start = 0
        for t, size in zip(tensors, sizes):
            index = [slice(None)] * g.ndim
            index[axis] = slice(start, start + size)
            if t.needs_grad:
                t._accumulate(g[tuple(index)])
            start += size
    out = Tensor(data)
    live = tuple(t for t in tensors if t.needs_grad)
    if live:
        out._parents = live
        out._backward = backward
    return out


def masked_softmax(scores: Tensor, mask: np.ndarray) -> Tensor:
    """Row-wise softmax over the last axis, restricted to ``mask`` entries.

    Masked-out entries get probability 0; all-masked rows give zero rows
    (keeps padding nodes inert).
    """
    mask = mask.astype(bool)
    z = np.where(mask, scores.data, -np.inf)
    zmax = np.max(z, axis=-1, keepdims=True)
    zmax = np.where(np.isfinite(zmax), zmax, 0.0)
    e = np.exp(z - zmax) * mask
    total = e.sum(axis=-1, keepdims=True)
    out_data = np.divide(e, total, out=np.zeros_like(e), where=total > 0)
    def backward(g: np.ndarray) -> None:
        inner = (g * out_data).sum(axis=-1, keepdims=True)
        scores._accumulate(out_data * (g - inner))
    out = Tensor(out_data)
    if scores.needs_grad:
        out._parents = (scores,)
        out._backward = backward
    return out


def bce_with_logits(logits: Tensor, targets: np.ndarray) -> Tensor:
    """Mean binary cross-entropy on raw logits (numerically stable)."""
    z = logits.data
    y = np.asarray(targets, dtype=np.float64).reshape(z.shape)
    loss = np.mean(np.maximum(z, 0.0) - z * y + np.log1p(np.exp(-np.abs(z))))
    def backward(g: np.ndarray) -> None:
        sigma = 1.0 / (1.0 + np.exp(-z))
        logits._accumulate(g * (sigma - y) / z.size)
    out = Tensor(loss)
    if logits.needs_grad:
        out._parents = (logits,)
        out._backward = backward
    return out


def dropout_mask(shape: tuple[int, ...], p: float, rng: np.random.Generator) -> np.ndarray:
    """Inverted-dropout multiplier: keep with probability 1 - p, scale by 1/(1 - p)."""
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must lie in [0, 1), got {p}")
    if p == 0.0:
        return np.ones(shape)
    return (rng.random(shape) >= p) / (1.0 - p)
