"""The tape: forward values against numpy, gradients against finite differences."""

import numpy as np
import pytest
from scipy import special

from citefp.gnn.autograd import Tensor, bce_with_logits, concat, dropout_mask, masked_softmax

import oracles


def to_scalar(t: Tensor) -> Tensor:
    while t.data.ndim:
        t = t.sum_axis(0)
    return t


def check_grads(build, *arrays, tol=2e-6):
    """Backward pass vs central finite differences, entry by entry."""
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    loss = build(*tensors)
    loss.backward()

    def value():
        return float(build(*[Tensor(a) for a in arrays]).data)

    for arr, tensor in zip(arrays, tensors):
        assert tensor.grad is not None and tensor.grad.shape == arr.shape
        for idx in np.ndindex(arr.shape):
            fd = oracles.fd_gradient(value, arr, idx)
            assert tensor.grad[idx] == pytest.approx(fd, abs=tol), (idx, tensor.grad[idx], fd)


def offzero(rng, *shape):
    """Random values bounded away from relu kinks."""
    return rng.uniform(0.2, 1.5, size=shape) * rng.choice([-1.0, 1.0], size=shape)


# ------------------------------------------------------------------- forward


def test_forward_values_match_numpy():
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(2, 3)), rng.normal(size=(3,))
    np.testing.assert_allclose((Tensor(a) + Tensor(b)).data, a + b)
    np.testing.assert_allclose((Tensor(a) * Tensor(b)).data, a * b)
    m, w = rng.normal(size=(2, 3, 4)), rng.normal(size=(4, 2))
    np.testing.assert_allclose((Tensor(m) @ Tensor(w)).data, m @ w)
    np.testing.assert_allclose(Tensor(a).relu().data, np.maximum(a, 0))
    np.testing.assert_allclose(Tensor(a).leaky_relu(0.2).data, np.where(a > 0, a, 0.2 * a))
    np.testing.assert_allclose(Tensor(m).transpose_last().data, np.swapaxes(m, -1, -2))
    np.testing.assert_allclose(Tensor(m).sum_axis(1).data, m.sum(axis=1))
    np.testing.assert_allclose(Tensor(a).reshape(6).data, a.reshape(6))
    np.testing.assert_allclose(concat([Tensor(a), Tensor(a)], axis=-1).data, np.concatenate([a, a], axis=-1))


# ------------------------------------------------------------------ gradients


def test_add_broadcast_grads():
    rng = np.random.default_rng(1)
    check_grads(lambda a, b: to_scalar((a + b) * (a + b)), rng.normal(size=(2, 3)), rng.normal(size=(3,)))


def test_mul_broadcast_grads():
    rng = np.random.default_rng(2)
    check_grads(lambda a, b: to_scalar(a * b), rng.normal(size=(2, 3)), rng.normal(size=(1, 3)))


def test_matmul_batched_grads():
    rng = np.random.default_rng(3)
    check_grads(lambda a, b: to_scalar(a @ b), rng.normal(size=(2, 3, 4)), rng.normal(size=(2, 4, 2)))


def test_matmul_broadcast_weight_grads():
    # a shared weight matrix applied across a batch dimension, as in the layers
    rng = np.random.default_rng(4)
    check_grads(lambda h, w: to_scalar(h @ w), rng.normal(size=(3, 4, 5)), rng.normal(size=(5, 2)))


def test_relu_and_leaky_relu_grads():
    rng = np.random.default_rng(5)
    check_grads(lambda a: to_scalar(a.relu()), offzero(rng, 3, 4))
    check_grads(lambda a: to_scalar(a.leaky_relu(0.2)), offzero(rng, 3, 4))


def test_transpose_reshape_sum_grads():
    rng = np.random.default_rng(6)
    check_grads(lambda a: to_scalar(a.transpose_last().sum_axis(0)), rng.normal(size=(2, 3, 4)))
    check_grads(lambda a: to_scalar(a.reshape(12) * a.reshape(12)), rng.normal(size=(3, 4)))


def test_concat_grads_split_correctly():
    rng = np.random.default_rng(7)
    scale = rng.normal(size=(2, 5))

    def build(a, b):
        return to_scalar(concat([a, b], axis=-1) * Tensor(scale))

    check_grads(build, rng.normal(size=(2, 3)), rng.normal(size=(2, 2)))


def test_reused_tensor_accumulates_gradient():
    x = Tensor(np.array([3.0, -2.0]), requires_grad=True)
    to_scalar(x * x).backward()
    np.testing.assert_allclose(x.grad, 2 * x.data)


def test_backward_requires_scalar():
    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ValueError):
        (x * x).backward()


def test_composed_expression_grads():
    rng = np.random.default_rng(8)
    op = rng.normal(size=(4, 4))

    def build(h, w):
        return to_scalar(((Tensor(op) @ h @ w).relu()).sum_axis(0))

    check_grads(build, offzero(rng, 4, 3), offzero(rng, 3, 2))


# ------------------------------------------------------------ masked softmax


def test_masked_softmax_forward():
    rng = np.random.default_rng(9)
    scores = rng.normal(size=(2, 3, 3))
    full = masked_softmax(Tensor(scores), np.ones((2, 3, 3), dtype=bool))
    np.testing.assert_allclose(full.data, special.softmax(scores, axis=-1), atol=1e-12)

    mask = np.ones((2, 3, 3), dtype=bool)
    mask[0, 0, 1] = False
    mask[1, 2, :] = False  # fully masked row
    out = masked_softmax(Tensor(scores), mask).data
    assert out[0, 0, 1] == 0.0
    np.testing.assert_allclose(out[1, 2], np.zeros(3))
    np.testing.assert_allclose(out[0, 0].sum(), 1.0)
    keep = special.softmax(scores[0, 0][[0, 2]])
    np.testing.assert_allclose(out[0, 0][[0, 2]], keep, atol=1e-12)


def test_masked_softmax_grads():
    rng = np.random.default_rng(10)
    mask = rng.random((2, 3, 3)) < 0.8
    mask[:, :, 0] = True  # keep every row alive
    weights = rng.normal(size=(2, 3, 3))

    def build(s):
        return to_scalar(masked_softmax(s, mask) * Tensor(weights))

    check_grads(build, rng.normal(size=(2, 3, 3)))


# --------------------------------------------------------------------- loss


def test_bce_matches_stable_reference():
    rng = np.random.default_rng(11)
    logits = rng.normal(size=8) * 3
    targets = rng.integers(0, 2, size=8).astype(np.float64)
    got = float(bce_with_logits(Tensor(logits), targets).data)
    want = float(np.mean(np.logaddexp(0.0, logits) - targets * logits))
    assert got == pytest.approx(want, abs=1e-12)


def test_bce_is_stable_at_extreme_logits():
    logits = np.array([900.0, -900.0])
    targets = np.array([0.0, 1.0])
    value = float(bce_with_logits(Tensor(logits), targets).data)
    assert np.isfinite(value) and value == pytest.approx(900.0)


def test_bce_gradient_is_sigma_minus_target_over_n():
    rng = np.random.default_rng(12)
    logits = rng.normal(size=6)
    targets = rng.integers(0, 2, size=6).astype(np.float64)
    t = Tensor(logits, requires_grad=True)
    bce_with_logits(t, targets).backward()
    np.testing.assert_allclose(t.grad, (special.expit(logits) - targets) / 6, atol=1e-12)
    check_grads(lambda l: bce_with_logits(l, targets), logits)


# ------------------------------------------------------------------- dropout


def test_dropout_mask_properties():
    rng = np.random.default_rng(13)
    np.testing.assert_array_equal(dropout_mask((4, 4), 0.0, rng), np.ones((4, 4)))
    mask = dropout_mask((200, 50), 0.3, rng)
    values = np.unique(mask)
    assert len(values) == 2 and values[0] == 0.0 and values[1] == pytest.approx(1 / 0.7)
    assert (mask > 0).mean() == pytest.approx(0.7, abs=0.02)
    with pytest.raises(ValueError):
        dropout_mask((2,), 1.0, rng)
    with pytest.raises(ValueError):
        dropout_mask((2,), -0.1, rng)


def test_dropout_mask_reproducible():
    a = dropout_mask((5, 5), 0.4, np.random.default_rng(99))
    b = dropout_mask((5, 5), 0.4, np.random.default_rng(99))
    np.testing.assert_array_equal(a, b)
