"""End-to-end orchestration of preprocessing and segmentation for one image."""
from __future__ import annotations

from typing import Callable

import numpy as np

from .config import PipelineConfig
from .image import BinaryMap, FovMask, GrayImage, ResponseField, RgbImage, normalize_minmax
from .kernels import FilterBank
from .preprocess import clahe, disc_se, extract_inverted_green, radial_pad, white_top_hat
from .segment import (
    binarize,
    scale_response,
    scale_threshold_bases,
    segment_multiscale,
    threshold_field,
)

StageHook = Callable[[str, GrayImage], None]


def enhance_image(
    rgb: RgbImage, mask: FovMask, cfg: PipelineConfig, on_stage: StageHook | None = None
) -> GrayImage:
    """Inverted green -> radial padding -> white top-hat -> CLAHE."""
    inverted = extract_inverted_green(rgb, mask)
    padded = radial_pad(inverted, mask, cfg.pad_width)
    tophat = white_top_hat(padded, disc_se(cfg.se_diameter))
    enhanced = clahe(tophat, cfg.clahe, mask)
    if on_stage is not None:
        on_stage("01_inverted_green", inverted)
        on_stage("02_radial_padded", padded)
        on_stage("03_top_hat", tophat)
        on_stage("04_clahe", enhanced)
    return enhanced


def segment_image(
    rgb: RgbImage, mask: FovMask, cfg: PipelineConfig,
    bank: FilterBank | None = None, on_stage: StageHook | None = None,
) -> BinaryMap:
    """Full pipeline for one fundus image under a config."""
    if bank is None:
        bank = cfg.build_bank()
    enhanced = enhance_image(rgb, mask, cfg, on_stage)
    tp = cfg.threshold_params()
    if on_stage is None:
        return segment_multiscale(
            enhanced, bank, tp, mask, cfg.orientation_pairing, cfg.normalization
        )
    # Same math as segment_multiscale, unrolled so each scale can be dumped.
    fused = np.zeros(enhanced.shape, dtype=bool)
    for i, scale in enumerate(bank.scales):
        sr = scale_response(enhanced, bank, i, cfg.orientation_pairing)
        t = threshold_field(sr.D, sr.H, tp, mask, cfg.normalization)
        m = binarize(sr.H, t)
        on_stage(f"05_response_L{scale.L}", normalize_minmax(sr.H))
        on_stage(f"06_binary_L{scale.L}", GrayImage.from_array(m.data.astype(np.float64)))
        fused |= m.data
    fused &= mask.data
    result = BinaryMap.from_array(fused)
    on_stage("07_fused", GrayImage.from_array(result.data.astype(np.float64)))
    return result


def threshold_bases_for_image(
    rgb: RgbImage, mask: FovMask, cfg: PipelineConfig, bank: FilterBank | None = None
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-scale (H, T1) pairs for cheap sweeps over the multiplier c."""
    if bank is None:
        bank = cfg.build_bank()
    enhanced = enhance_image(rgb, mask, cfg)
    return scale_threshold_bases(
        enhanced, bank, cfg.w, mask, cfg.orientation_pairing, cfg.normalization
    )
