"""dfhc: fold multi-channel time series into square images, with transform-
domain variants, and classify the images with a compact CNN."""

from .errors import (
    ConfigError,
    DataError,
    DataQualityError,
    DfhcError,
    DivergenceError,
    GeometryError,
)
from .fold import (
    FoldMode,
    FoldPlan,
    ImageRaster,
    encode_gray_strip,
    encode_rgb_strip,
    fold_strip,
    plan_fold,
    resize_image,
    unfold_image,
)
from .pipeline import (
    CodecSpec,
    CodingMethod,
    EncodedImage,
    encode_rgb_tf,
    encode_segment,
    encode_tf_rgb,
    fold_base_image,
)
from .pngio import encode_png, quantize_u8, read_png, write_png
from .series import (
    ChannelSeries,
    Cluster,
    NormalizedSegment,
    SeriesSegment,
    StepSpec,
    normalize_min_max,
    resample_cubic,
    segment_from_arrays,
    step_difference,
    window_segments,
)
from .transforms import (
    Sinogram,
    SpectrumSeries,
    WaveletCoeffs,
    dft_magnitude_centered,
    dwt_decompose,
    dwt_reconstruct,
    dwt2_image,
    fft2_magnitude_image,
    radon_image,
    radon_sinogram,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelSeries",
    "Cluster",
    "CodecSpec",
    "CodingMethod",
    "ConfigError",
    "DataError",
    "DataQualityError",
    "DfhcError",
    "DivergenceError",
    "EncodedImage",
    "FoldMode",
    "FoldPlan",
    "GeometryError",
    "ImageRaster",
    "NormalizedSegment",
    "SeriesSegment",
    "Sinogram",
    "SpectrumSeries",
    "StepSpec",
    "WaveletCoeffs",
    "dft_magnitude_centered",
    "dwt2_image",
    "dwt_decompose",
    "dwt_reconstruct",
    "encode_gray_strip",
    "encode_png",
    "encode_rgb_strip",
    "encode_rgb_tf",
    "encode_segment",
    "encode_tf_rgb",
    "fft2_magnitude_image",
    "fold_base_image",
    "fold_strip",
    "normalize_min_max",
    "plan_fold",
    "quantize_u8",
    "radon_image",
    "radon_sinogram",
    "read_png",
    "resample_cubic",
    "resize_image",
    "segment_from_arrays",
    "step_difference",
    "unfold_image",
    "window_segments",
    "write_png",
]
