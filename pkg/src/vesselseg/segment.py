"""Vessel extraction: filter-bank responses, adaptive thresholding, fusion.

Per scale, the pipeline takes the orientation-wise maximum of the matched
filter responses (H) and pairs it with the derivative-filter response (D) at
the winning orientation. D is box-averaged, its magnitude min-max normalized
over the field of view, and the result modulates a reference threshold
proportional to the mean of H: near step edges the local derivative mean is
large, the threshold rises and the edge response is rejected, while across a
vessel the antisymmetric derivative averages out and the threshold stays
low. Per-scale binary maps are fused with a pixel-wise OR and clipped to the
field of view.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import conv as engine
from .image import BinaryMap, FovMask, GrayImage, ResponseField
from .kernels import FilterBank, Kernel

PAIRINGS = ("argmax_H", "max_abs_D")
NORMALIZATIONS = ("abs", "signed")

# A mean response this close to zero is float dust from zero-mean kernels on
# a structureless field, not vessel evidence.
ZERO_RESPONSE_EPS = 1e-12
_REJECT_ALL = np.finfo(np.float64).max


@dataclass(frozen=True)
class ThresholdParams:
    """Reference-threshold multiplier c and mean-filter side length w (odd)."""

    c: float = 2.3
    w: int = 31

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError(f"c must be positive, got {self.c!r}")
        if not isinstance(self.w, (int, np.integer)) or self.w < 3 or self.w % 2 == 0:
            raise ValueError(f"w must be an odd integer >= 3, got {self.w!r}")


@dataclass(frozen=True, eq=False)
class ScaleResponse:
    """Orientation-fused responses of one scale.

    H holds the per-pixel maximum matched-filter response over orientations,
    best_orientation the winning orientation index (lowest index on ties),
    and D the derivative response paired with H per the pairing rule.
    """

    H: ResponseField
    D: ResponseField
    best_orientation: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.best_orientation)
        if idx.shape != self.H.shape or self.D.shape != self.H.shape:
            raise ValueError("ScaleResponse: H, D and best_orientation must share dimensions")
        idx = np.ascontiguousarray(idx.astype(np.int32))
        idx.setflags(write=False)
        object.__setattr__(self, "best_orientation", idx)


def convolve(img: GrayImage, kernel: Kernel, strategy: str = "auto") -> ResponseField:
    """Correlate the image with one kernel (centered, replicate edges)."""
    return ResponseField.from_array(engine.correlate2d(img.data, kernel.weights, strategy))


def scale_response(
    img: GrayImage,
    bank: FilterBank,
    scale_index: int,
    pairing: str = "argmax_H",
    strategy: str = "auto",
) -> ScaleResponse:
    """Apply every orientation of one scale and fuse across orientations."""
    if not 0 <= scale_index < bank.n_scales:
        raise ValueError(f"scale_index {scale_index} out of range [0, {bank.n_scales})")
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown orientation pairing {pairing!r}")

    mf = np.stack(
        engine.correlate2d_bank(img.data, [k.weights for k in bank.mf_kernels[scale_index]], strategy)
    )
    fdog = np.stack(
        engine.correlate2d_bank(img.data, [k.weights for k in bank.fdog_kernels[scale_index]], strategy)
    )
    best = np.argmax(mf, axis=0)  # first maximum wins ties
    h = np.take_along_axis(mf, best[None], axis=0)[0]
    if pairing == "argmax_H":
        d = np.take_along_axis(fdog, best[None], axis=0)[0]
    else:
        best_d = np.argmax(np.abs(fdog), axis=0)
        d = np.take_along_axis(fdog, best_d[None], axis=0)[0]
    return ScaleResponse(
        H=ResponseField.from_array(h),
        D=ResponseField.from_array(d),
        best_orientation=best,
    )


def threshold_field(
    D: ResponseField,
    H: ResponseField,
    params: ThresholdParams,
    mask: FovMask,
    normalization: str = "abs",
) -> ResponseField:
    """Per-pixel adaptive threshold T = (1 + Dbar_m) * c * mean_fov(H).

    Dbar_m is the box-averaged derivative response (its magnitude under the
    default "abs" normalization) min-max normalized over field-of-view
    pixels. The FOV mean of H excludes padding and exterior pixels, which
    would otherwise bias the reference threshold downward.

    Degenerate case: a structureless field leaves the mean response at float
    dust around zero; the inclusive >= binarization would then mark every
    pixel, so a non-positive reference threshold saturates T to the largest
    finite double and nothing passes.
    """
    if D.shape != H.shape or D.shape != mask.shape:
        raise ValueError("threshold_field: D, H and mask must share dimensions")
    if normalization not in NORMALIZATIONS:
        raise ValueError(f"unknown normalization {normalization!r}")
    sel = mask.data
    if not sel.any():
        raise ValueError("threshold_field: empty FOV mask")

    t_c = params.c * float(H.data[sel].mean())
    if t_c <= ZERO_RESPONSE_EPS:
        return ResponseField.from_array(np.full(H.shape, _REJECT_ALL))

    dm = engine.mean_filter(D.data, params.w)
    field = np.abs(dm) if normalization == "abs" else dm
    lo = float(field[sel].min())
    hi = float(field[sel].max())
    if hi <= lo:
        dbar = np.zeros_like(field)
    else:
        dbar = np.clip((field - lo) / (hi - lo), 0.0, 1.0)
    return ResponseField.from_array((1.0 + dbar) * t_c)


def binarize(H: ResponseField, T: ResponseField) -> BinaryMap:
    """Vessel decision: response at or above the local threshold (inclusive)."""
    if H.shape != T.shape:
        raise ValueError("binarize: H and T must share dimensions")
    return BinaryMap.from_array(H.data >= T.data)


def segment_multiscale(
    img: GrayImage,
    bank: FilterBank,
    tp: ThresholdParams,
    mask: FovMask,
    pairing: str = "argmax_H",
    normalization: str = "abs",
    strategy: str = "auto",
) -> BinaryMap:
    """Full multiscale extraction: per-scale maps OR-fused, then FOV-masked."""
    if bank.n_scales == 0:
        raise ValueError("segment_multiscale: empty filter bank")
    fused = np.zeros(img.shape, dtype=bool)
    for i in range(bank.n_scales):
        sr = scale_response(img, bank, i, pairing, strategy)
        t = threshold_field(sr.D, sr.H, tp, mask, normalization)
        fused |= binarize(sr.H, t).data
    fused &= mask.data
    return BinaryMap.from_array(fused)


def scale_threshold_bases(
    img: GrayImage,
    bank: FilterBank,
    w: int,
    mask: FovMask,
    pairing: str = "argmax_H",
    normalization: str = "abs",
    strategy: str = "auto",
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-scale (H, T1) pairs with T = c * T1.

    The filtering pass is independent of c, so callers sweeping c (grid
    search, threshold studies) compute these once and re-binarize cheaply.
    """
    base = ThresholdParams(c=1.0, w=w)
    out = []
    for i in range(bank.n_scales):
        sr = scale_response(img, bank, i, pairing, strategy)
        t1 = threshold_field(sr.D, sr.H, base, mask, normalization)
        out.append((sr.H.data, t1.data))
    return out


def binarize_bases(
    bases: list[tuple[np.ndarray, np.ndarray]], c: float, mask: FovMask
) -> BinaryMap:
    """Fused binary map at multiplier c from precomputed (H, T1) pairs."""
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    fused = np.zeros(mask.shape, dtype=bool)
    with np.errstate(over="ignore"):  # c * REJECT_ALL saturating to inf is fine
        for h, t1 in bases:
            fused |= h >= c * t1
    fused &= mask.data
    return BinaryMap.from_array(fused)
