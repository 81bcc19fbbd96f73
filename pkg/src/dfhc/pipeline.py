"""Full encoding pipelines: one call from a raw segment to a square raster.

Two families compose the geometry with the transforms: series-transform
methods (FFT_RGB, WT_RGB) transform each channel first and fold the result;
image-transform methods (RGB_FFT, RGB_WT, RGB_Radon) fold first and
transform the square image.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError
from .fold import (
    FoldMode,
    FoldPlan,
    ImageRaster,
    encode_gray_strip,
    encode_rgb_strip,
    fold_strip,
    plan_fold,
    resize_image,
)
from .series import (
    Cluster,
    ChannelSeries,
    NormalizedSegment,
    SeriesSegment,
    StepSpec,
    scale_unit,
    normalize_min_max,
    resample_values,
    step_difference,
)
from .transforms import (
    dft_magnitude_centered,
    dwt_decompose,
    dwt2_image,
    fft2_magnitude_image,
    radon_image,
)


class CodingMethod(str, Enum):
    GRAY = "Gray"
    RGB = "RGB"
    GRAY_STEP = "GrayStep"
    RGB_STEP = "RGBStep"
    FFT_RGB = "FFT_RGB"
    WT_RGB = "WT_RGB"
    RGB_FFT = "RGB_FFT"
    RGB_WT = "RGB_WT"
    RGB_RADON = "RGB_Radon"

    @classmethod
    def parse(cls, name: str) -> "CodingMethod":
        wanted = str(name).lower().replace("_", "").replace("-", "")
        for m in cls:
            if m.value.lower().replace("_", "") == wanted:
                return m
        raise ConfigError(
            f"unknown coding method {name!r}; choose from "
            f"{', '.join(m.value for m in cls)}"
        )


STEP_METHODS = {CodingMethod.GRAY_STEP, CodingMethod.RGB_STEP}
TF_RGB_METHODS = {CodingMethod.FFT_RGB, CodingMethod.WT_RGB}
RGB_TF_METHODS = {CodingMethod.RGB_FFT, CodingMethod.RGB_WT, CodingMethod.RGB_RADON}


@dataclass(frozen=True)
class CodecSpec:
    """Everything needed to encode one segment into one image."""

    method: CodingMethod
    target_size: int = 64
    step: int | None = None
    wavelet_level: int = 3
    radon_angles: int = 180

    def __post_init__(self):
        if self.target_size < 8:
            raise ConfigError(f"target_size must be >= 8, got {self.target_size}")
        if self.method in STEP_METHODS and (self.step is None or self.step < 1):
            raise ConfigError(f"method {self.method.value} requires a positive step")
        if self.wavelet_level < 1:
            raise ConfigError(f"wavelet_level must be >= 1, got {self.wavelet_level}")
        if self.radon_angles < 2:
            raise ConfigError(f"radon_angles must be >= 2, got {self.radon_angles}")


@dataclass(frozen=True)
class EncodedImage:
    raster: ImageRaster
    plan: FoldPlan
    method: CodingMethod


def _fit_to_plan(segment: NormalizedSegment, plan: FoldPlan) -> NormalizedSegment:
    """Resample every channel to the plan's effective length (clipped: cubic
    splines can overshoot the unit range slightly)."""
    if segment.channel_length == plan.effective_len:
        return segment
    clusters = tuple(
        Cluster(
            tuple(
                ChannelSeries(
                    np.clip(resample_values(ch.values, plan.effective_len), 0.0, 1.0)
                )
                for ch in cl.channels
            )
        )
        for cl in segment.clusters
    )
    return NormalizedSegment(clusters, label=segment.label, source_id=segment.source_id)


def fold_base_image(
    segment: NormalizedSegment, mode: FoldMode
) -> tuple[ImageRaster, FoldPlan]:
    """Plan, resample, stripe and fold a normalized segment at native width."""
    rows = segment.c if mode is FoldMode.RGB else segment.r
    plan = plan_fold(rows, segment.channel_length, mode)
    fitted = _fit_to_plan(segment, plan)
    if mode is FoldMode.RGB:
        strip = encode_rgb_strip(fitted, plan)
    else:
        strip = encode_gray_strip(fitted, plan)
    return fold_strip(strip, plan), plan


def _transform_channels(segment: NormalizedSegment, spec: CodecSpec) -> NormalizedSegment:
    """Replace each channel by its 1-D transform, rescaled into [0, 1]."""
    if spec.method is CodingMethod.WT_RGB:
        block = 1 << spec.wavelet_level
        n = segment.channel_length
        dyadic = (n // block) * block
        if dyadic < block:
            raise ConfigError(
                f"channels of length {n} too short for wavelet level {spec.wavelet_level}"
            )

    def xform(values: np.ndarray) -> np.ndarray:
        if spec.method is CodingMethod.FFT_RGB:
            return dft_magnitude_centered(values).magnitudes
        v = values if values.size == dyadic else resample_values(values, dyadic)
        return dwt_decompose(v, spec.wavelet_level).concat()

    clusters = tuple(
        Cluster(
            tuple(ChannelSeries(scale_unit(xform(ch.values))) for ch in cl.channels)
        )
        for cl in segment.clusters
    )
    return NormalizedSegment(clusters, label=segment.label, source_id=segment.source_id)


def encode_tf_rgb(segment: NormalizedSegment, spec: CodecSpec) -> ImageRaster:
    """Transform-then-fold: 1-D transform per channel, then the RGB fold."""
    if spec.method not in TF_RGB_METHODS:
        raise ConfigError(f"{spec.method.value} is not a transform-first method")
    transformed = _transform_channels(segment, spec)
    img, _ = fold_base_image(transformed, FoldMode.RGB)
    return resize_image(img, spec.target_size)


def _apply_image_transform(base: ImageRaster, spec: CodecSpec) -> ImageRaster:
    if spec.method is CodingMethod.RGB_FFT:
        return fft2_magnitude_image(base)
    if spec.method is CodingMethod.RGB_WT:
        return dwt2_image(base)
    return radon_image(base, spec.radon_angles)


def encode_rgb_tf(segment: NormalizedSegment, spec: CodecSpec) -> ImageRaster:
    """Fold-then-transform: RGB fold image first, then a 2-D image transform."""
    if spec.method not in RGB_TF_METHODS:
        raise ConfigError(f"{spec.method.value} is not a fold-first method")
    base, _ = fold_base_image(segment, FoldMode.RGB)
    return resize_image(_apply_image_transform(base, spec), spec.target_size)


def encode_segment(segment: SeriesSegment, spec: CodecSpec) -> EncodedImage:
    """Normalize a raw segment and encode it with the configured method."""
    norm = normalize_min_max(segment)
    method = spec.method
    if method in STEP_METHODS:
        norm = step_difference(norm, StepSpec(spec.step))
    if method in TF_RGB_METHODS:
        norm = _transform_channels(norm, spec)
    mode = FoldMode.GRAY if method in (CodingMethod.GRAY, CodingMethod.GRAY_STEP) else FoldMode.RGB
    img, plan = fold_base_image(norm, mode)
    if method in RGB_TF_METHODS:
        img = _apply_image_transform(img, spec)
    return EncodedImage(resize_image(img, spec.target_size), plan, method)
