"""Layers for the compact classifier, with exact analytic gradients.

Feature maps are plain float64 arrays of shape (batch, channels, height,
width). Each layer caches what its backward pass needs; forward/backward
pairs are exercised against central finite differences in the test suite.
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import DataError


def check_tensor4(x) -> np.ndarray:
    a = np.asarray(x, dtype=np.float64)
    if a.ndim != 4:
        raise DataError(f"expected a (batch, ch, h, w) tensor, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DataError("tensor contains non-finite values")
    return a


class Layer:
    """Common protocol: forward(x) -> y, backward(dy) -> dx, params/grads dicts."""

    params: dict
    grads: dict

    def __init__(self):
        self.params = {}
        self.grads = {}

    def forward(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def backward(self, dy: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def spec(self) -> dict:
        return {"kind": type(self).__name__}


class Conv2D(Layer):
    """Odd-kernel convolution, stride 1, zero padding preserving H and W."""

    def __init__(self, in_channels: int, out_channels: int, kernel: int, rng: np.random.Generator):
        super().__init__()
        if kernel % 2 == 0:
            raise DataError(f"kernel must be odd to preserve spatial dims, got {kernel}")
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel = kernel
        self.pad = kernel // 2
        fan_in = in_channels * kernel * kernel
        limit = np.sqrt(6.0 / fan_in)
        self.params = {
            "W": rng.uniform(-limit, limit, size=(out_channels, in_channels, kernel, kernel)),
            "b": np.zeros(out_channels),
        }
        self._cols = None
        self._shape = None

    def _im2col(self, x: np.ndarray) -> np.ndarray:
        """(B, C, H, W) -> contiguous (B*H*W, C*k*k) patch matrix."""
        b, _, h, w = x.shape
        p = self.pad
        padded = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        windows = sliding_window_view(padded, (self.kernel, self.kernel), axis=(2, 3))
        return windows.transpose(0, 2, 3, 1, 4, 5).reshape(b * h * w, -1)

    def forward(self, x):
        if x.shape[1] != self.in_channels:
            raise DataError(f"expected {self.in_channels} input channels, got {x.shape[1]}")
        b, _, h, w = x.shape
        self._shape = (b, h, w)
        self._cols = self._im2col(x)
        w_mat = self.params["W"].reshape(self.out_channels, -1)
        out = self._cols @ w_mat.T + self.params["b"]
        return out.reshape(b, h, w, self.out_channels).transpose(0, 3, 1, 2)

    def backward(self, dy):
        b, h, w = self._shape
        dy_flat = dy.transpose(0, 2, 3, 1).reshape(b * h * w, self.out_channels)
        self.grads["W"] = (dy_flat.T @ self._cols).reshape(self.params["W"].shape)
        self.grads["b"] = dy_flat.sum(axis=0)
        # dx is the correlation of dy with the flipped kernel, channels swapped
        flipped = (
            self.params["W"][:, :, ::-1, ::-1]
            .transpose(1, 0, 2, 3)
            .reshape(self.in_channels, -1)
        )
        dcols = self._im2col(dy)
        return (dcols @ flipped.T).reshape(b, h, w, self.in_channels).transpose(0, 3, 1, 2)

    def spec(self):
        return {
            "kind": "Conv2D",
            "in_channels": self.in_channels,
            "out_channels": self.out_channels,
            "kernel": self.kernel,
        }


class ReLU(Layer):
    def __init__(self):
        super().__init__()
        self._mask = None

    def forward(self, x):
        self._mask = x > 0
        return np.where(self._mask, x, 0.0)

    def backward(self, dy):
        return np.where(self._mask, dy, 0.0)


class MaxPool2(Layer):
    """2x2 max pooling, stride 2. Gradient flows only to the argmax cell
    (first occurrence on ties), so the routed gradient sum is preserved."""

    def __init__(self):
        super().__init__()
        self._arg = None
        self._in_shape = None

    def forward(self, x):
        b, c, h, w = x.shape
        if h % 2 or w % 2:
            raise DataError(f"pooling needs even spatial dims, got {h}x{w}")
        self._in_shape = x.shape
        cells = (
            x.reshape(b, c, h // 2, 2, w // 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(b, c, h // 2, w // 2, 4)
        )
        self._arg = cells.argmax(axis=-1)
        return np.take_along_axis(cells, self._arg[..., None], axis=-1)[..., 0]

    def backward(self, dy):
        b, c, h, w = self._in_shape
        cells = np.zeros((b, c, h // 2, w // 2, 4))
        np.put_along_axis(cells, self._arg[..., None], dy[..., None], axis=-1)
        return (
            cells.reshape(b, c, h // 2, w // 2, 2, 2)
            .transpose(0, 1, 2, 4, 3, 5)
            .reshape(b, c, h, w)
        )


class Flatten(Layer):
    def __init__(self):
        super().__init__()
        self._in_shape = None

    def forward(self, x):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dy):
        return dy.reshape(self._in_shape)


class Dense(Layer):
    def __init__(self, in_features: int, out_features: int, rng: np.random.Generator):
        super().__init__()
        self.in_features = in_features
        self.out_features = out_features
        limit = np.sqrt(6.0 / in_features)
        self.params = {
            "W": rng.uniform(-limit, limit, size=(in_features, out_features)),
            "b": np.zeros(out_features),
        }
        self._x = None

    def forward(self, x):
        if x.shape[1] != self.in_features:
            raise DataError(f"expected {self.in_features} features, got {x.shape[1]}")
        self._x = x
        return x @ self.params["W"] + self.params["b"]

    def backward(self, dy):
        self.grads["W"] = self._x.T @ dy
        self.grads["b"] = dy.sum(axis=0)
        return dy @ self.params["W"].T

    def spec(self):
        return {
            "kind": "Dense",
            "in_features": self.in_features,
            "out_features": self.out_features,
        }


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    eps = np.finfo(np.float64).tiny
    return float(-np.mean(np.log(probs[np.arange(labels.size), labels] + eps)))
