"""Transform-domain primitives: centered DFT magnitude, an orthonormal db3
wavelet filter bank with periodic boundary handling, and the 2-D image
transforms (spectrum, single-level wavelet tiling, rotate-and-sum sinogram).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .fold import ImageRaster

# Daubechies-3 scaling (low-pass) filter, orthonormal: sum h = sqrt(2), sum h^2 = 1.
DB3_LO = np.array(
    [
        0.3326705529509569,
        0.8068915093133388,
        0.4598775021193313,
        -0.13501102001039084,
        -0.08544127388224149,
        0.035226291882100656,
    ]
)
# Quadrature-mirror high-pass partner: g[n] = (-1)^n h[M-1-n].
DB3_HI = DB3_LO[::-1].copy()
DB3_HI[1::2] *= -1.0


@dataclass(frozen=True, eq=False)
class SpectrumSeries:
    """Zero-frequency-centered magnitude spectrum of a real series."""

    magnitudes: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.magnitudes, dtype=np.float64)
        if m.ndim != 1 or m.size < 2:
            raise DataError(f"spectrum must be 1-D with >= 2 bins, got shape {m.shape}")
        if m.min() < 0.0:
            raise DataError("spectrum magnitudes must be non-negative")
        m = m.copy()
        m.flags.writeable = False
        object.__setattr__(self, "magnitudes", m)

    @property
    def center_bin(self) -> int:
        return self.magnitudes.size // 2


@dataclass(frozen=True, eq=False)
class WaveletCoeffs:
    """Multilevel periodized decomposition: approx a_J plus details d_J..d_1."""

    level: int
    approx: np.ndarray
    details: tuple[np.ndarray, ...]  # coarsest first

    def __post_init__(self):
        if self.level < 1 or len(self.details) != self.level:
            raise DataError(
                f"level {self.level} inconsistent with {len(self.details)} detail bands"
            )
        n = self.approx.size
        for d in self.details:
            if d.size != n:
                raise DataError("detail band sizes must double from coarsest to finest")
            n *= 2

    @property
    def input_length(self) -> int:
        return self.approx.size + sum(d.size for d in self.details)

    def concat(self) -> np.ndarray:
        """Coefficients in imaging order [a_J, d_J, ..., d_1]."""
        return np.concatenate([self.approx, *self.details])


@dataclass(frozen=True, eq=False)
class Sinogram:
    """Projections indexed by (rho bin, theta bin), theta in [0, pi)."""

    data: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.float64)
        if d.ndim != 2:
            raise DataError(f"sinogram must be 2-D, got shape {d.shape}")
        d = d.copy()
        d.flags.writeable = False
        object.__setattr__(self, "data", d)

    @property
    def rho_bins(self) -> int:
        return self.data.shape[0]

    @property
    def theta_bins(self) -> int:
        return self.data.shape[1]


def dft_magnitude_centered(channel) -> SpectrumSeries:
    """Magnitude of the DFT with the zero-frequency bin moved to index T // 2."""
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 1 or x.size < 2:
        raise DataError(f"need a 1-D series of length >= 2, got shape {x.shape}")
    return SpectrumSeries(np.fft.fftshift(np.abs(np.fft.fft(x))))


def _analysis_step(x: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    n = x.size
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(lo.size)[None, :]) % n
    win = x[idx]
    return win @ lo, win @ hi


def _synthesis_step(a: np.ndarray, d: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    n = 2 * a.size
    idx = (2 * np.arange(a.size)[:, None] + np.arange(lo.size)[None, :]) % n
    x = np.zeros(n)
    np.add.at(x, idx, a[:, None] * lo[None, :] + d[:, None] * hi[None, :])
    return x


def dwt_decompose(channel, level: int) -> WaveletCoeffs:
    """Multilevel db3 analysis with periodic boundary handling.

    Periodization keeps the total coefficient count equal to the input length
    and makes the transform orthonormal (energy preserving) at every dyadic
    length.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 1:
        raise DataError(f"need a 1-D series, got shape {x.shape}")
    if level < 1:
        raise DataError(f"level must be >= 1, got {level}")
    if x.size % (1 << level) != 0 or x.size < (1 << level):
        raise DataError(
            f"length {x.size} not divisible by 2^{level}; resample before analysis"
        )
    details = []
    a = x
    for _ in range(level):
        a, d = _analysis_step(a, DB3_LO, DB3_HI)
        details.append(d)
    return WaveletCoeffs(level=level, approx=a, details=tuple(reversed(details)))


def dwt_reconstruct(coeffs: WaveletCoeffs) -> np.ndarray:
    """Perfectly reconstruct the analyzed signal from its coefficients."""
    a = coeffs.approx
    for d in coeffs.details:
        a = _synthesis_step(a, d, DB3_LO, DB3_HI)
    return a


def _per_channel_unit(planes: np.ndarray) -> np.ndarray:
    out = np.empty_like(planes)
    for k in range(planes.shape[2]):
        p = planes[:, :, k]
        lo, hi = p.min(), p.max()
        out[:, :, k] = 0.0 if hi == lo else (p - lo) / (hi - lo)
    return out


def fft2_centered_magnitude(plane: np.ndarray) -> np.ndarray:
    """Raw 2-D DFT magnitudes with the zero-frequency bin at (H//2, W//2)."""
    return np.fft.fftshift(np.abs(np.fft.fft2(np.asarray(plane, dtype=np.float64))))


def fft2_magnitude_image(img: ImageRaster) -> ImageRaster:
    """Per-channel centered 2-D magnitude spectrum, log-compressed to [0, 1].

    log(1 + m) keeps the DC bin from crushing the rest of the spectrum.
    """
    planes = np.empty_like(img.data)
    for k in range(img.channels):
        planes[:, :, k] = np.log1p(fft2_centered_magnitude(img.data[:, :, k]))
    return ImageRaster(_per_channel_unit(planes))


def _dwt_axis(plane: np.ndarray, axis: int):
    moved = np.moveaxis(plane, axis, -1)
    n = moved.shape[-1]
    idx = (2 * np.arange(n // 2)[:, None] + np.arange(DB3_LO.size)[None, :]) % n
    win = moved[..., idx]
    lo = win @ DB3_LO
    hi = win @ DB3_HI
    return np.moveaxis(lo, -1, axis), np.moveaxis(hi, -1, axis)


def dwt2_subbands(plane: np.ndarray):
    """Raw single-level separable db3 subbands of a square plane.

    Returns (aa, ad, da, dd): approx/detail along height x width, each of
    shape (H/2, W/2).
    """
    p = np.asarray(plane, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] % 2 or p.shape[1] % 2:
        raise DataError(f"2-D wavelet needs even sides, got shape {p.shape}")
    lo_w, hi_w = _dwt_axis(p, axis=1)    # filter along width
    aa, da = _dwt_axis(lo_w, axis=0)     # then along height
    ad, dd = _dwt_axis(hi_w, axis=0)
    return aa, ad, da, dd


def _unit_or_zero(band: np.ndarray) -> np.ndarray:
    lo, hi = band.min(), band.max()
    return np.zeros_like(band) if hi == lo else (band - lo) / (hi - lo)


def dwt2_image(img: ImageRaster) -> ImageRaster:
    """Single-level separable db3 analysis of each channel.

    The four subbands are tiled [approx | width-detail ; height-detail |
    diagonal-detail] into an image of the original size, each subband
    min-max scaled to [0, 1] on its own.
    """
    planes = np.empty_like(img.data)
    for k in range(img.channels):
        aa, ad, da, dd = dwt2_subbands(img.data[:, :, k])
        planes[:, :, k] = np.block(
            [
                [_unit_or_zero(aa), _unit_or_zero(ad)],
                [_unit_or_zero(da), _unit_or_zero(dd)],
            ]
        )
    return ImageRaster(planes)


def sinogram_shape(side: int, theta_bins: int) -> tuple[int, int]:
    """Rho and theta bin counts used by radon_sinogram for a side x side image.

    Rho bins have unit pixel pitch, span the image diagonal, and share the
    image's parity so integer pixel coordinates land on exact bin centers.
    """
    n_rho = math.ceil(side * math.sqrt(2.0))
    if (n_rho - side) % 2:
        n_rho += 1
    return n_rho, theta_bins


def radon_sinogram(plane: np.ndarray, theta_bins: int) -> Sinogram:
    """Discrete Radon transform of one square channel.

    For each angle theta = k*pi/theta_bins every pixel's value is deposited
    onto the two rho bins bracketing its rotated coordinate
    x*cos(theta) + y*sin(theta), with linear weights. This realizes the line
    integral with a unit tent kernel in rho: each angle's column sums to the
    total image mass exactly, and theta = 0 reduces to plain column sums.
    """
    p = np.asarray(plane, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DataError(f"radon needs a square 2-D plane, got shape {p.shape}")
    if theta_bins < 2:
        raise DataError(f"theta_bins must be >= 2, got {theta_bins}")
    side = p.shape[0]
    n_rho, _ = sinogram_shape(side, theta_bins)
    center = 0.5 * (side - 1)
    ys, xs = np.mgrid[0:side, 0:side]
    x = (xs - center).ravel()
    y = (ys - center).ravel()
    vals = p.ravel()
    rho_center = 0.5 * (n_rho - 1)
    out = np.empty((n_rho, theta_bins))
    for k in range(theta_bins):
        theta = k * math.pi / theta_bins
        u = x * math.cos(theta) + y * math.sin(theta) + rho_center
        i0 = np.floor(u).astype(int)
        frac = u - i0
        out[:, k] = np.bincount(i0, vals * (1.0 - frac), minlength=n_rho) + np.bincount(
            i0 + 1, vals * frac, minlength=n_rho
        )
    return Sinogram(out)


def radon_image(img: ImageRaster, theta_bins: int) -> ImageRaster:
    """Per-channel sinogram stack, each channel min-max scaled to [0, 1]."""
    shape = sinogram_shape(img.height, theta_bins)
    planes = np.empty(shape + (img.channels,))
    for k in range(img.channels):
        planes[:, :, k] = radon_sinogram(img.data[:, :, k], theta_bins).data
    return ImageRaster(_per_channel_unit(planes))
