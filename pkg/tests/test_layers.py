from typing import Callable

import numpy as np
import pytest

from net.backprop import loss_and_gradients
from net.layers import (conv2d_backward, conv2d_forward, dense_backward, dense_forward, dropout_backward,
                        dropout_forward, maxpool2_backward, maxpool2_forward, softmax, softmax_cross_entropy)
from net.model import ClassifierModel, Topology

EPS = 1e-6


def numeric_grad(f: Callable[[], float], x: np.ndarray, indices=None) -> np.ndarray:
    indices = list(np.ndindex(x.shape)) if indices is None else indices
    grad = np.zeros(len(indices))
    for i, idx in enumerate(indices):
        old = x[idx]
        x[idx] = old + EPS
        plus = f()
        x[idx] = old - EPS
        minus = f()
        x[idx] = old
        grad[i] = (plus - minus) / (2 * EPS)
    return grad


def rel_error(a: np.ndarray, b: np.ndarray) -> float:
    a, b = np.ravel(a), np.ravel(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(a) + np.linalg.norm(b), 1e-12))


@pytest.mark.parametrize("kernel", [3, 9])
def test_conv_gradients(rng, kernel):
    x = rng.standard_normal((2, 2, 10, 10))
    w = rng.standard_normal((3, 2, kernel, kernel)) * 0.1
    b = rng.standard_normal(3)
    r = rng.standard_normal((2, 3, 10, 10))

    def loss():
        return float(np.sum(conv2d_forward(x, w, b)[0] * r))

    out, cache = conv2d_forward(x, w, b)
    assert out.shape == (2, 3, 10, 10)
    dx, dw, db = conv2d_backward(r, cache)
    assert rel_error(dx, numeric_grad(loss, x)) < 1e-6
    assert rel_error(dw, numeric_grad(loss, w)) < 1e-6
    assert rel_error(db, numeric_grad(loss, b)) < 1e-6


def test_conv_matches_direct_correlation(rng):
    x = rng.standard_normal((1, 1, 5, 5))
    w = rng.standard_normal((1, 1, 3, 3))
    out, _ = conv2d_forward(x, w, np.zeros(1))
    padded = np.pad(x[0, 0], 1)
    direct = np.array([[np.sum(padded[i:i + 3, j:j + 3] * w[0, 0]) for j in range(5)] for i in range(5)])
    assert np.allclose(out[0, 0], direct)


def test_maxpool_routes_gradient_to_maximum(rng):
    x = rng.standard_normal((2, 3, 8, 8))
    r = rng.standard_normal((2, 3, 4, 4))

    def loss():
        return float(np.sum(maxpool2_forward(x)[0] * r))

    out, cache = maxpool2_forward(x)
    assert np.allclose(out, x.reshape(2, 3, 4, 2, 4, 2).max(axis=(3, 5)))
    dx = maxpool2_backward(r, cache)
    assert rel_error(dx, numeric_grad(loss, x)) < 1e-6
    assert np.count_nonzero(dx) == r.size


def test_maxpool_tie_goes_to_first_element():
    x = np.ones((1, 1, 2, 2))
    out, cache = maxpool2_forward(x)
    dx = maxpool2_backward(np.ones((1, 1, 1, 1)), cache)
    assert out[0, 0, 0, 0] == 1.0
    assert np.array_equal(dx[0, 0], np.array([[1.0, 0.0], [0.0, 0.0]]))


def test_dense_gradients(rng):
    x = rng.standard_normal((4, 6))
    w = rng.standard_normal((6, 5))
    b = rng.standard_normal(5)
    r = rng.standard_normal((4, 5))

    def loss():
        return float(np.sum(dense_forward(x, w, b)[0] * r))

    dx, dw, db = dense_backward(r, dense_forward(x, w, b)[1])
    assert rel_error(dx, numeric_grad(loss, x)) < 1e-7
    assert rel_error(dw, numeric_grad(loss, w)) < 1e-7
    assert rel_error(db, numeric_grad(loss, b)) < 1e-7


def test_softmax_cross_entropy_gradient(rng):
    logits = rng.standard_normal((5, 9))
    labels = np.array([0, 3, 8, 3, 1])

    def loss():
        return softmax_cross_entropy(logits, labels)[0]

    _, dlogits = softmax_cross_entropy(logits, labels)
    assert rel_error(dlogits, numeric_grad(loss, logits)) < 1e-7


def test_softmax_sums_to_one(rng):
    for _ in range(100):
        probs = softmax(rng.standard_normal((3, 9)) * rng.uniform(0.1, 50.0))
        assert np.all(probs > 0)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)


def test_dropout_is_seeded_and_inverted():
    x = np.ones((1000, 10))
    a, mask_a = dropout_forward(x, 0.5, np.random.default_rng(3))
    b, _ = dropout_forward(x, 0.5, np.random.default_rng(3))
    assert np.array_equal(a, b)
    assert set(np.unique(a)) <= {0.0, 2.0}
    assert abs(a.mean() - 1.0) < 0.05
    assert np.array_equal(dropout_backward(np.ones_like(x), mask_a), mask_a)
    untouched, _ = dropout_forward(x, 0.0, np.random.default_rng(3))
    assert np.array_equal(untouched, x)


def test_full_model_gradients_match_finite_differences(rng):
    topology = Topology(image_size=16, conv_channels=(2, 2), dense_units=(8,), dropout=0.5)
    model = ClassifierModel.initialize(topology, seed=5, dtype=np.float64)
    images = rng.uniform(0.0, 1.0, size=(2, 3, 16, 16))
    labels = np.array([4, 7])

    def loss():
        return loss_and_gradients(model, images, labels, train_mode=True, dropout_seed=13)[0]

    _, grads = loss_and_gradients(model, images, labels, train_mode=True, dropout_seed=13)
    picker = np.random.default_rng(0)
    for name, value in model.params.items():
        flat = picker.choice(value.size, size=min(value.size, 12), replace=False)
        indices = [np.unravel_index(i, value.shape) for i in flat]
        numeric = numeric_grad(loss, value, indices)
        analytic = np.array([grads[name][idx] for idx in indices])
        assert rel_error(analytic, numeric) < 1e-4, name
