"""Multi-cluster time-series containers and the operations upstream of imaging.

A *cluster* groups 1-3 channels of one physical modality (e.g. a 3-axis
accelerometer); a segment is an ordered list of clusters whose channels all
share one length. Everything here is immutable and pure, so segments can be
encoded in parallel without coordination.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import DataError, DataQualityError

MAX_CLUSTER_DIM = 3


def _freeze(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=np.float64)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ChannelSeries:
    """One raw sensor channel. Values are finite reals, length >= 2."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1:
            raise DataError(f"channel must be 1-D, got shape {v.shape}")
        if v.size < 2:
            raise DataError(f"channel needs at least 2 samples, got {v.size}")
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise DataQualityError(f"non-finite value at sample {bad}")
        object.__setattr__(self, "values", _freeze(v))

    @property
    def length(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class Cluster:
    """1-3 equal-length channels of one modality."""

    channels: tuple[ChannelSeries, ...]

    def __post_init__(self):
        ch = tuple(self.channels)
        if not 1 <= len(ch) <= MAX_CLUSTER_DIM:
            raise DataError(f"cluster dimension must be 1..{MAX_CLUSTER_DIM}, got {len(ch)}")
        lengths = {c.length for c in ch}
        if len(lengths) != 1:
            raise DataError(f"cluster channels differ in length: {sorted(lengths)}")
        object.__setattr__(self, "channels", ch)

    @property
    def q(self) -> int:
        return len(self.channels)

    @property
    def length(self) -> int:
        return self.channels[0].length


@dataclass(frozen=True, eq=False)
class SeriesSegment:
    """One labeled window of raw sensor data: the unit of encoding."""

    clusters: tuple[Cluster, ...]
    label: str
    source_id: str

    def __post_init__(self):
        cl = tuple(self.clusters)
        if len(cl) < 1:
            raise DataError("segment needs at least one cluster")
        lengths = {c.length for c in cl}
        if len(lengths) != 1:
            raise DataError(f"clusters differ in channel length: {sorted(lengths)}")
        object.__setattr__(self, "clusters", cl)

    @property
    def c(self) -> int:
        """Number of clusters."""
        return len(self.clusters)

    @property
    def r(self) -> int:
        """Total channel count across clusters."""
        return sum(cl.q for cl in self.clusters)

    @property
    def channel_length(self) -> int:
        return self.clusters[0].length

    def iter_channels(self):
        """Yield (cluster_index, channel_index, values) in stacking order."""
        for i, cl in enumerate(self.clusters):
            for j, ch in enumerate(cl.channels):
                yield i, j, ch.values


@dataclass(frozen=True, eq=False)
class NormalizedSegment(SeriesSegment):
    """A SeriesSegment whose every value lies in [0, 1]."""

    def __post_init__(self):
        super().__post_init__()
        for i, j, v in self.iter_channels():
            if v.min() < 0.0 or v.max() > 1.0:
                raise DataError(
                    f"cluster {i} channel {j}: values outside [0, 1] "
                    f"(min={v.min():g}, max={v.max():g})"
                )


@dataclass(frozen=True)
class StepSpec:
    """Lag used by step (differencing) codings."""

    step: int = 1

    def __post_init__(self):
        if self.step < 1:
            raise DataError(f"step must be >= 1, got {self.step}")


def segment_from_arrays(
    cluster_arrays, label: str, source_id: str, normalized: bool = False
) -> SeriesSegment:
    """Build a segment from a list of (q, L) arrays, one per cluster."""
    clusters = []
    for arr in cluster_arrays:
        a = np.atleast_2d(np.asarray(arr, dtype=np.float64))
        clusters.append(Cluster(tuple(ChannelSeries(row) for row in a)))
    cls = NormalizedSegment if normalized else SeriesSegment
    return cls(tuple(clusters), label=label, source_id=source_id)


def scale_unit(v: np.ndarray) -> np.ndarray:
    lo, hi = v.min(), v.max()
    if hi == lo:
        # A flat channel carries no shape information; map to the darkest pixel.
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def normalize_min_max(segment: SeriesSegment) -> NormalizedSegment:
    """Min-max scale each channel independently into [0, 1].

    Non-constant channels map their minimum to exactly 0 and their maximum to
    exactly 1; constant channels map to all zeros.
    """
    for i, j, v in segment.iter_channels():
        if not np.all(np.isfinite(v)):
            raise DataQualityError(f"cluster {i} channel {j}: non-finite values")
    clusters = tuple(
        Cluster(tuple(ChannelSeries(scale_unit(ch.values)) for ch in cl.channels))
        for cl in segment.clusters
    )
    return NormalizedSegment(clusters, label=segment.label, source_id=segment.source_id)


def window_segments(
    stream: SeriesSegment, window_len: int, overlap: int = 0
) -> list[SeriesSegment]:
    """Cut a long segment into fixed-length windows.

    Stride is ``window_len - overlap``; a trailing partial window is dropped.
    Each window keeps the stream's label and gets ``_w<k>`` appended to its
    source id.
    """
    n = stream.channel_length
    if window_len < 1:
        raise DataError(f"window_len must be >= 1, got {window_len}")
    if not 0 <= overlap < window_len:
        raise DataError(f"overlap must be in [0, window_len), got {overlap}")
    if window_len > n:
        raise DataError(f"window_len {window_len} exceeds stream length {n}: no windows")
    stride = window_len - overlap
    cls = type(stream)
    out = []
    for k, start in enumerate(range(0, n - window_len + 1, stride)):
        clusters = tuple(
            Cluster(
                tuple(
                    ChannelSeries(ch.values[start : start + window_len])
                    for ch in cl.channels
                )
            )
            for cl in stream.clusters
        )
        out.append(cls(clusters, label=stream.label, source_id=f"{stream.source_id}_w{k}"))
    return out


def step_difference(segment: NormalizedSegment, spec: StepSpec) -> NormalizedSegment:
    """Replace each channel by its s-lag difference, rescaled back into [0, 1].

    The raw difference lies in [-1, 1]; a second min-max pass restores the
    unit range that the image codecs require.
    """
    s = spec.step
    if s >= segment.channel_length:
        raise DataError(
            f"step {s} must be smaller than channel length {segment.channel_length}"
        )
    clusters = tuple(
        Cluster(
            tuple(
                ChannelSeries(scale_unit(ch.values[s:] - ch.values[:-s]))
                for ch in cl.channels
            )
        )
        for cl in segment.clusters
    )
    return NormalizedSegment(clusters, label=segment.label, source_id=segment.source_id)


def resample_cubic(channel: ChannelSeries, target_len: int) -> ChannelSeries:
    """Resample a channel to ``target_len`` points with a natural cubic spline.

    The spline is fitted on knots 0..L-1 and evaluated at target_len uniform
    points spanning [0, L-1], so the endpoints are preserved exactly.
    """
    values = resample_values(channel.values, target_len)
    return ChannelSeries(values)


def resample_values(values: np.ndarray, target_len: int) -> np.ndarray:
    """Array-level natural-cubic-spline resampling (see resample_cubic)."""
    v = np.asarray(values, dtype=np.float64)
    n = v.size
    if n < 4:
        raise DataError(f"cubic resampling needs >= 4 samples, got {n}")
    if target_len < 2:
        raise DataError(f"target_len must be >= 2, got {target_len}")
    if target_len == n:
        return v.copy()
    spline = CubicSpline(np.arange(n), v, bc_type="natural")
    t = np.linspace(0.0, n - 1.0, target_len)
    out = spline(t)
    out[0], out[-1] = v[0], v[-1]
    return out
