"""Square-fold geometry: turn channel strips into square image rasters.

The geometry solves the largest square width w with w**2 = l_eff * strip_rows
and w divisible by strip_rows, where strip_rows is the cluster count (RGB) or
the total channel count (Gray). Folding then cuts the strip into width-w
blocks and stacks them, so every block keeps all rows spatially adjacent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DataError, GeometryError
from .series import NormalizedSegment


class FoldMode(str, Enum):
    RGB = "RGB"
    GRAY = "Gray"


@dataclass(frozen=True, eq=False)
class ImageRaster:
    """A width x height x channels array of reals in [0, 1], row-major."""

    data: np.ndarray  # (height, width, channels)

    def __post_init__(self):
        a = np.asarray(self.data, dtype=np.float64)
        if a.ndim == 2:
            a = a[:, :, np.newaxis]
        if a.ndim != 3 or a.shape[2] not in (1, 3):
            raise DataError(f"raster must be (H, W, 1|3), got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise DataError("raster contains non-finite values")
        if a.min() < 0.0 or a.max() > 1.0:
            raise DataError(
                f"raster values outside [0, 1]: min={a.min():g}, max={a.max():g}"
            )
        a = a.copy()
        a.flags.writeable = False
        object.__setattr__(self, "data", a)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass(frozen=True)
class FoldPlan:
    """Solved fold geometry for one strip layout."""

    width: int           # side of the square image
    effective_len: int   # samples kept per channel
    strip_rows: int      # c for RGB strips, r for Gray strips
    mode: FoldMode

    def __post_init__(self):
        w, l_eff, rows = self.width, self.effective_len, self.strip_rows
        if rows < 1 or w < rows or w % rows != 0 or w * w != l_eff * rows:
            raise GeometryError(
                f"inconsistent fold plan: w={w}, l_eff={l_eff}, rows={rows}"
            )

    @property
    def pixel_count(self) -> int:
        return self.width * self.width

    @property
    def bands(self) -> int:
        """Number of strip_rows-tall blocks stacked into the square."""
        return self.width // self.strip_rows


def plan_fold(strip_rows: int, raw_len: int, mode: FoldMode) -> FoldPlan:
    """Solve the fold geometry for ``strip_rows`` rows of ``raw_len`` samples.

    Starts from w = floor(sqrt(strip_rows * raw_len)) and decrements until
    w is a multiple of strip_rows; the effective length w**2 / strip_rows is
    then an exact downsample target (always <= raw_len).
    """
    if strip_rows < 1:
        raise GeometryError(f"strip_rows must be >= 1, got {strip_rows}")
    if raw_len < strip_rows:
        raise GeometryError(
            f"{mode.value} fold needs length >= {strip_rows}, got {raw_len}"
        )
    w = math.isqrt(strip_rows * raw_len)
    w -= w % strip_rows
    if w < strip_rows:
        raise GeometryError(
            f"no valid fold width >= {strip_rows} for length {raw_len}"
        )
    return FoldPlan(
        width=w,
        effective_len=(w * w) // strip_rows,
        strip_rows=strip_rows,
        mode=mode,
    )


def _require_len(segment: NormalizedSegment, plan: FoldPlan) -> None:
    if segment.channel_length != plan.effective_len:
        raise GeometryError(
            f"channels have length {segment.channel_length}, "
            f"plan expects {plan.effective_len}"
        )


def encode_rgb_strip(segment: NormalizedSegment, plan: FoldPlan) -> ImageRaster:
    """One strip row per cluster; channels map in order to R, G, B.

    Clusters with fewer than 3 channels get zero-filled color planes.
    """
    if plan.mode is not FoldMode.RGB or plan.strip_rows != segment.c:
        raise GeometryError(
            f"plan is {plan.mode.value}/{plan.strip_rows} rows, "
            f"segment has {segment.c} clusters"
        )
    _require_len(segment, plan)
    strip = np.zeros((segment.c, plan.effective_len, 3))
    for i, cl in enumerate(segment.clusters):
        for j, ch in enumerate(cl.channels):
            strip[i, :, j] = ch.values
    return ImageRaster(strip)


def encode_gray_strip(segment: NormalizedSegment, plan: FoldPlan) -> ImageRaster:
    """All channels stacked as rows of a single-channel strip, no zero fill."""
    if plan.mode is not FoldMode.GRAY or plan.strip_rows != segment.r:
        raise GeometryError(
            f"plan is {plan.mode.value}/{plan.strip_rows} rows, "
            f"segment has {segment.r} channels"
        )
    _require_len(segment, plan)
    strip = np.zeros((segment.r, plan.effective_len, 1))
    for row, (_, _, values) in enumerate(segment.iter_channels()):
        strip[row, :, 0] = values
    return ImageRaster(strip)


def fold_strip(strip: ImageRaster, plan: FoldPlan) -> ImageRaster:
    """Band-fold a strip into a square: consecutive width-w blocks of the
    strip are stacked vertically, keeping all strip rows adjacent per band."""
    rows, l_eff, w = plan.strip_rows, plan.effective_len, plan.width
    if strip.height != rows or strip.width != l_eff:
        raise GeometryError(
            f"strip is {strip.height}x{strip.width}, "
            f"plan expects {rows}x{l_eff}"
        )
    square = (
        strip.data.reshape(rows, plan.bands, w, strip.channels)
        .swapaxes(0, 1)
        .reshape(w, w, strip.channels)
    )
    return ImageRaster(square)


def unfold_image(square: ImageRaster, plan: FoldPlan) -> ImageRaster:
    """Exact inverse of fold_strip."""
    rows, l_eff, w = plan.strip_rows, plan.effective_len, plan.width
    if square.height != w or square.width != w:
        raise GeometryError(f"image is {square.height}x{square.width}, plan expects {w}x{w}")
    strip = (
        square.data.reshape(plan.bands, rows, w, square.channels)
        .swapaxes(0, 1)
        .reshape(rows, l_eff, square.channels)
    )
    return ImageRaster(strip)


def _axis_coords(src: int, dst: int) -> np.ndarray:
    # Endpoint-aligned sampling: output corners coincide with input corners.
    if dst == 1:
        return np.array([0.5 * (src - 1)])
    return np.arange(dst) * ((src - 1) / (dst - 1))


def resize_image(img: ImageRaster, target_h: int, target_w: int | None = None) -> ImageRaster:
    """Bilinear resample to target_h x target_w (square if target_w omitted)."""
    if target_w is None:
        target_w = target_h
    if target_h < 1 or target_w < 1:
        raise DataError(f"invalid resize target {target_h}x{target_w}")
    if (target_h, target_w) == (img.height, img.width):
        return img
    ys = _axis_coords(img.height, target_h)
    xs = _axis_coords(img.width, target_w)
    y0 = np.floor(ys).astype(int)
    x0 = np.floor(xs).astype(int)
    y1 = np.minimum(y0 + 1, img.height - 1)
    x1 = np.minimum(x0 + 1, img.width - 1)
    fy = (ys - y0)[:, None, None]
    fx = (xs - x0)[None, :, None]
    d = img.data
    out = (
        d[y0[:, None], x0[None, :]] * (1 - fy) * (1 - fx)
        + d[y0[:, None], x1[None, :]] * (1 - fy) * fx
        + d[y1[:, None], x0[None, :]] * fy * (1 - fx)
        + d[y1[:, None], x1[None, :]] * fy * fx
    )
    return ImageRaster(np.clip(out, 0.0, 1.0))
