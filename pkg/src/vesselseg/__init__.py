"""Retinal blood vessel segmentation via multiscale matched filtering with a
derivative-of-Gaussian adaptive threshold."""

from .config import DEFAULT_SCALES, PipelineConfig, load_config, save_config
from .dataset import DriveDataset, DriveLayoutError, DriveRecord, load_drive_dataset
from .evaluate import (
    ConfusionCounts,
    Metrics,
    Summary,
    aggregate,
    confusion_counts,
    metrics,
)
from .image import (
    BinaryMap,
    FovMask,
    GrayImage,
    ResponseField,
    RgbImage,
    invert,
    normalize_minmax,
)
from .kernels import (
    FilterBank,
    Kernel,
    KernelKind,
    ScaleParams,
    build_filter_bank,
    fdog_kernel,
    mf_kernel,
    rotate_kernel,
)
from .pipeline import enhance_image, segment_image, threshold_bases_for_image
from .preprocess import (
    ClaheParams,
    StructuringElement,
    clahe,
    disc_se,
    extract_inverted_green,
    radial_pad,
    white_top_hat,
)
from .segment import (
    ScaleResponse,
    ThresholdParams,
    binarize,
    binarize_bases,
    convolve,
    scale_response,
    scale_threshold_bases,
    segment_multiscale,
    threshold_field,
)

__version__ = "0.1.0"

__all__ = [
    "BinaryMap",
    "ClaheParams",
    "ConfusionCounts",
    "DEFAULT_SCALES",
    "DriveDataset",
    "DriveLayoutError",
    "DriveRecord",
    "FilterBank",
    "FovMask",
    "GrayImage",
    "Kernel",
    "KernelKind",
    "Metrics",
    "PipelineConfig",
    "ResponseField",
    "RgbImage",
    "ScaleParams",
    "ScaleResponse",
    "StructuringElement",
    "Summary",
    "ThresholdParams",
    "aggregate",
    "binarize",
    "binarize_bases",
    "build_filter_bank",
    "clahe",
    "confusion_counts",
    "convolve",
    "disc_se",
    "enhance_image",
    "extract_inverted_green",
    "fdog_kernel",
    "invert",
    "load_config",
    "load_drive_dataset",
    "metrics",
    "mf_kernel",
    "normalize_minmax",
    "radial_pad",
    "rotate_kernel",
    "save_config",
    "scale_response",
    "scale_threshold_bases",
    "segment_image",
    "segment_multiscale",
    "threshold_bases_for_image",
    "threshold_field",
    "white_top_hat",
]
