import numpy as np
import pytest

from dfhc.cnn.layers import (
    Conv2D,
    Dense,
    Flatten,
    MaxPool2,
    ReLU,
    check_tensor4,
    cross_entropy,
    softmax,
)
from dfhc.errors import DataError


def numeric_param_grad(layer, x, name, index, eps=1e-6):
    """Central finite difference of sum(forward(x)) wrt one parameter."""
    p = layer.params[name]
    old = p[index]
    p[index] = old + eps
    up = layer.forward(x).sum()
    p[index] = old - eps
    down = layer.forward(x).sum()
    p[index] = old
    return (up - down) / (2 * eps)


def check_param_grads(layer, x, rtol=1e-6):
    out = layer.forward(x)
    layer.backward(np.ones_like(out))
    for name, p in layer.params.items():
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            num = numeric_param_grad(layer, x, name, idx)
            ana = layer.grads[name][idx]
            assert num == pytest.approx(ana, rel=rtol, abs=1e-7), (name, idx)


def check_input_grad(layer, x, rtol=1e-6):
    out = layer.forward(x)
    dx = layer.backward(np.ones_like(out))
    eps = 1e-6
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        old = x[idx]
        x[idx] = old + eps
        up = layer.forward(x).sum()
        x[idx] = old - eps
        down = layer.forward(x).sum()
        x[idx] = old
        num = (up - down) / (2 * eps)
        assert num == pytest.approx(dx[idx], rel=rtol, abs=1e-7), idx
    layer.forward(x)  # restore cache


class TestConv2D:
    def test_hand_traced_3x3(self):
        rng = np.random.default_rng(0)
        conv = Conv2D(1, 1, 3, rng)
        x = rng.normal(size=(1, 1, 4, 4))
        out = conv.forward(x)
        w = conv.params["W"][0, 0]
        b = conv.params["b"][0]
        padded = np.zeros((6, 6))
        padded[1:5, 1:5] = x[0, 0]
        for i in range(4):
            for j in range(4):
                expected = (padded[i : i + 3, j : j + 3] * w).sum() + b
                assert out[0, 0, i, j] == pytest.approx(expected, rel=1e-12)

    def test_preserves_spatial_dims(self):
        rng = np.random.default_rng(1)
        for k in (1, 3, 5):
            conv = Conv2D(2, 4, k, rng)
            out = conv.forward(rng.normal(size=(2, 2, 8, 8)))
            assert out.shape == (2, 4, 8, 8)

    def test_even_kernel_rejected(self):
        with pytest.raises(DataError):
            Conv2D(1, 1, 4, np.random.default_rng(0))

    def test_param_gradients(self):
        rng = np.random.default_rng(2)
        conv = Conv2D(2, 3, 3, rng)
        check_param_grads(conv, rng.normal(size=(2, 2, 5, 5)))

    def test_input_gradient(self):
        rng = np.random.default_rng(3)
        conv = Conv2D(2, 3, 3, rng)
        check_input_grad(conv, rng.normal(size=(1, 2, 4, 4)))


class TestDense:
    def test_param_gradients(self):
        rng = np.random.default_rng(4)
        dense = Dense(6, 4, rng)
        check_param_grads(dense, rng.normal(size=(3, 6)))

    def test_input_gradient(self):
        rng = np.random.default_rng(5)
        dense = Dense(5, 3, rng)
        check_input_grad(dense, rng.normal(size=(2, 5)))


class TestReLU:
    def test_masks_negatives(self):
        relu = ReLU()
        out = relu.forward(np.array([[-1.0, 0.0, 2.0]]))
        np.testing.assert_array_equal(out, [[0.0, 0.0, 2.0]])
        dx = relu.backward(np.array([[1.0, 1.0, 1.0]]))
        np.testing.assert_array_equal(dx, [[0.0, 0.0, 1.0]])

    def test_input_gradient(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=(2, 3, 4, 4))
        x[np.abs(x) < 1e-3] = 0.5  # keep clear of the kink
        check_input_grad(ReLU(), x)


class TestMaxPool:
    def test_downsamples(self):
        x = np.arange(16.0).reshape(1, 1, 4, 4)
        out = MaxPool2().forward(x)
        np.testing.assert_array_equal(out[0, 0], [[5.0, 7.0], [13.0, 15.0]])

    def test_routes_gradient_to_argmax_only(self):
        pool = MaxPool2()
        x = np.arange(16.0).reshape(1, 1, 4, 4)
        pool.forward(x)
        g = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        dx = pool.backward(g)
        assert dx.sum() == g.sum()
        assert dx[0, 0, 1, 1] == 1.0 and dx[0, 0, 1, 3] == 2.0
        assert dx[0, 0, 3, 1] == 3.0 and dx[0, 0, 3, 3] == 4.0
        assert np.count_nonzero(dx) == 4

    def test_ties_route_to_single_cell(self):
        pool = MaxPool2()
        x = np.zeros((1, 1, 2, 2))  # all tied
        pool.forward(x)
        dx = pool.backward(np.array([[[[5.0]]]]))
        assert dx.sum() == 5.0
        assert np.count_nonzero(dx) == 1

    def test_odd_dims_rejected(self):
        with pytest.raises(DataError):
            MaxPool2().forward(np.zeros((1, 1, 5, 4)))

    def test_input_gradient(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=(2, 2, 4, 4))
        check_input_grad(MaxPool2(), x)


class TestSoftmaxCrossEntropy:
    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(8)
        p = softmax(rng.normal(size=(10, 7)) * 10)
        np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
        assert p.min() > 0.0

    def test_combined_gradient_is_probs_minus_onehot(self):
        # single sample: d(loss)/d(logits) = p - onehot, checked numerically
        rng = np.random.default_rng(9)
        logits = rng.normal(size=(1, 5))
        label = np.array([2])
        p = softmax(logits)
        analytic = p.copy()
        analytic[0, label[0]] -= 1.0
        eps = 1e-7
        for j in range(5):
            up = logits.copy()
            up[0, j] += eps
            down = logits.copy()
            down[0, j] -= eps
            num = (
                cross_entropy(softmax(up), label) - cross_entropy(softmax(down), label)
            ) / (2 * eps)
            assert num == pytest.approx(analytic[0, j], abs=1e-8)

    def test_stable_under_large_logits(self):
        p = softmax(np.array([[1000.0, 0.0]]))
        assert np.isfinite(p).all() and p[0, 0] == pytest.approx(1.0)


class TestFlattenAndChecks:
    def test_flatten_round_trip(self):
        flat = Flatten()
        x = np.random.default_rng(10).normal(size=(2, 3, 4, 4))
        out = flat.forward(x)
        assert out.shape == (2, 48)
        np.testing.assert_array_equal(flat.backward(out), x)

    def test_tensor4_validation(self):
        with pytest.raises(DataError):
            check_tensor4(np.zeros((2, 3, 4)))
        with pytest.raises(DataError):
            check_tensor4(np.full((1, 1, 2, 2), np.nan))
