"""The compact convolutional classifier: four conv/pool stages and a softmax
head, sized for 32x32 or 64x64 inputs."""

from __future__ import annotations

import json

import numpy as np

from ..errors import ConfigError, DataError, DivergenceError
from .layers import Conv2D, Dense, Flatten, Layer, MaxPool2, ReLU, check_tensor4, cross_entropy, softmax

SUPPORTED_INPUT_SIZES = (32, 64)
CONV_WIDTHS = (8, 16, 32, 64)
CHECKPOINT_VERSION = 1


class CnnModel:
    def __init__(self, layers: list[Layer], input_size: int, in_channels: int, num_classes: int):
        self.layers = layers
        self.input_size = input_size
        self.in_channels = in_channels
        self.num_classes = num_classes
        self._velocity: dict[tuple[int, str], np.ndarray] = {}

    # -- inference ---------------------------------------------------------

    def logits(self, batch: np.ndarray) -> np.ndarray:
        x = check_tensor4(batch)
        expected = (self.in_channels, self.input_size, self.input_size)
        if x.shape[1:] != expected:
            raise DataError(f"batch shape {x.shape[1:]} does not match model {expected}")
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Class probabilities, one row per sample."""
        return softmax(self.logits(batch))

    def predict(self, batch: np.ndarray) -> np.ndarray:
        return self.forward(batch).argmax(axis=1)

    # -- training ----------------------------------------------------------

    def backward_and_update(
        self, batch: np.ndarray, labels: np.ndarray, lr: float, momentum: float
    ) -> float:
        """One SGD-with-momentum step on the mean cross-entropy of a batch."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.min() < 0 or labels.max() >= self.num_classes:
            raise DataError(
                f"labels must lie in [0, {self.num_classes}), got "
                f"[{labels.min()}, {labels.max()}]"
            )
        probs = softmax(self.logits(batch))
        loss = cross_entropy(probs, labels)
        if not np.isfinite(loss):
            raise DivergenceError(
                f"non-finite loss {loss} (batch size {labels.size}); "
                "reduce the learning rate"
            )
        grad = probs.copy()
        grad[np.arange(labels.size), labels] -= 1.0
        grad /= labels.size
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        if lr != 0.0:
            for idx, layer in enumerate(self.layers):
                for name, param in layer.params.items():
                    key = (idx, name)
                    vel = self._velocity.get(key)
                    if vel is None:
                        vel = np.zeros_like(param)
                    vel = momentum * vel - lr * layer.grads[name]
                    self._velocity[key] = vel
                    param += vel
        return loss

    # -- state -------------------------------------------------------------

    def state(self) -> list[dict[str, np.ndarray]]:
        return [{k: v.copy() for k, v in layer.params.items()} for layer in self.layers]

    def load_state(self, state: list[dict[str, np.ndarray]]) -> None:
        if len(state) != len(self.layers):
            raise DataError("state does not match model layers")
        for layer, params in zip(self.layers, state):
            for k, v in params.items():
                if layer.params[k].shape != v.shape:
                    raise DataError(f"parameter {k} shape mismatch")
                layer.params[k] = v.copy()
        self._velocity.clear()


def build_model(
    input_size: int,
    in_channels: int,
    num_classes: int,
    seed: int,
    conv_widths: tuple[int, ...] = CONV_WIDTHS,
) -> CnnModel:
    """Alternating conv(3x3, same)+relu+pool stages (8->64 by default), then
    a dense softmax head. He-uniform initialization from the seeded
    generator."""
    if input_size not in SUPPORTED_INPUT_SIZES:
        raise ConfigError(
            f"input_size must be one of {SUPPORTED_INPUT_SIZES}, got {input_size}"
        )
    if in_channels not in (1, 3):
        raise ConfigError(f"in_channels must be 1 or 3, got {in_channels}")
    if num_classes < 2:
        raise ConfigError(f"num_classes must be >= 2, got {num_classes}")
    conv_widths = tuple(int(w) for w in conv_widths)
    if len(conv_widths) < 1 or any(w < 1 for w in conv_widths):
        raise ConfigError(f"conv_widths must be positive, got {conv_widths}")
    if input_size >> len(conv_widths) < 1:
        raise ConfigError(
            f"{len(conv_widths)} pooling stages exhaust a {input_size}px input"
        )
    rng = np.random.default_rng(seed)
    layers: list[Layer] = []
    ch = in_channels
    side = input_size
    for width in conv_widths:
        layers.append(Conv2D(ch, width, kernel=3, rng=rng))
        layers.append(ReLU())
        layers.append(MaxPool2())
        ch = width
        side //= 2
    layers.append(Flatten())
    layers.append(Dense(ch * side * side, num_classes, rng=rng))
    return CnnModel(layers, input_size, in_channels, num_classes)


def save_model(model: CnnModel, path) -> None:
    """Checkpoint layer specs plus parameter arrays; round-trips exactly."""
    arch = {
        "version": CHECKPOINT_VERSION,
        "input_size": model.input_size,
        "in_channels": model.in_channels,
        "num_classes": model.num_classes,
        "conv_widths": [
            layer.out_channels for layer in model.layers if isinstance(layer, Conv2D)
        ],
        "layers": [layer.spec() for layer in model.layers],
    }
    arrays = {}
    for idx, layer in enumerate(model.layers):
        for name, param in layer.params.items():
            arrays[f"layer{idx}_{name}"] = param
    np.savez(path, arch=json.dumps(arch), **arrays)


def load_model(path) -> CnnModel:
    with np.load(path, allow_pickle=False) as blob:
        arch = json.loads(str(blob["arch"]))
        if arch.get("version") != CHECKPOINT_VERSION:
            raise DataError(f"unsupported checkpoint version {arch.get('version')}")
        model = build_model(
            arch["input_size"],
            arch["in_channels"],
            arch["num_classes"],
            seed=0,
            conv_widths=tuple(arch.get("conv_widths", CONV_WIDTHS)),
        )
        expected = [layer.spec() for layer in model.layers]
        if expected != arch["layers"]:
            raise DataError("checkpoint layer stack does not match this build")
        for idx, layer in enumerate(model.layers):
            for name in layer.params:
                layer.params[name] = blob[f"layer{idx}_{name}"].copy()
    return model
