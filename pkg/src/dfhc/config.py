"""Run configuration: codec choice, windowing, split seed, CNN hyperparameters."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError
from .pipeline import CodecSpec, CodingMethod

SEED_ENV_VAR = "DFHC_SEED"


@dataclass(frozen=True)
class CnnHyperParams:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.01
    momentum: float = 0.9
    seed: int = 0
    conv_widths: tuple[int, ...] = (8, 16, 32, 64)

    def __post_init__(self):
        if self.epochs < 0 or self.batch_size < 1:
            raise ConfigError(f"invalid epochs/batch_size: {self.epochs}/{self.batch_size}")
        if self.learning_rate < 0 or not 0 <= self.momentum < 1:
            raise ConfigError(
                f"invalid learning_rate/momentum: {self.learning_rate}/{self.momentum}"
            )


@dataclass(frozen=True)
class RunConfig:
    codec: CodecSpec
    cnn: CnnHyperParams
    split_seed: int = 0
    window_len: int | None = None
    overlap: int = 0


_KNOWN_KEYS = {"codec", "cnn", "split_seed", "window"}


def load_run_config(path) -> RunConfig:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    unknown = set(raw) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"config {path}: unknown keys {sorted(unknown)}")
    codec_raw = raw.get("codec")
    if not isinstance(codec_raw, dict) or "method" not in codec_raw:
        raise ConfigError(f"config {path}: 'codec' with a 'method' is required")
    try:
        codec = CodecSpec(
            method=CodingMethod.parse(codec_raw["method"]),
            target_size=int(codec_raw.get("target_size", 64)),
            step=(int(codec_raw["step"]) if "step" in codec_raw else None),
            wavelet_level=int(codec_raw.get("wavelet_level", 3)),
            radon_angles=int(codec_raw.get("radon_angles", 180)),
        )
        cnn_raw = raw.get("cnn", {})
        cnn = CnnHyperParams(
            epochs=int(cnn_raw.get("epochs", 10)),
            batch_size=int(cnn_raw.get("batch_size", 32)),
            learning_rate=float(cnn_raw.get("learning_rate", 0.01)),
            momentum=float(cnn_raw.get("momentum", 0.9)),
            seed=int(cnn_raw.get("seed", 0)),
            conv_widths=tuple(int(w) for w in cnn_raw.get("conv_widths", (8, 16, 32, 64))),
        )
        window_raw = raw.get("window") or {}
        window_len = int(window_raw["length"]) if "length" in window_raw else None
        overlap = int(window_raw.get("overlap", 0))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"config {path} is invalid: {exc}") from exc
    config = RunConfig(
        codec=codec,
        cnn=cnn,
        split_seed=int(raw.get("split_seed", 0)),
        window_len=window_len,
        overlap=overlap,
    )
    return apply_seed_override(config)


def apply_seed_override(config: RunConfig) -> RunConfig:
    """DFHC_SEED in the environment overrides every configured seed."""
    value = os.environ.get(SEED_ENV_VAR)
    if value is None:
        return config
    try:
        seed = int(value)
    except ValueError as exc:
        raise ConfigError(f"{SEED_ENV_VAR}={value!r} is not an integer") from exc
    return replace(config, split_seed=seed, cnn=replace(config.cnn, seed=seed))
