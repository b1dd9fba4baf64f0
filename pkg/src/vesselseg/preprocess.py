"""Fundus image enhancement: inverted green channel, radial fake padding,
white top-hat, and CLAHE.

The enhancement chain turns an RGB fundus image into a bright-vessel
grayscale image ready for matched filtering: vessels are darkest in the
green channel, so it is inverted; the area just outside the field of view is
fake-padded radially so filters near the rim see plausible context instead
of a hard black edge; a white top-hat with a disc wider than the thickest
vessel suppresses large bright structures (optic disc, exudates) while
keeping the thin vessels; CLAHE restores local contrast afterwards.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .image import FovMask, GrayImage, RgbImage


@dataclass(frozen=True, eq=False)
class StructuringElement:
    """Flat disc footprint for grayscale morphology."""

    diameter: int
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=bool)
        if arr.shape != (self.diameter, self.diameter):
            raise ValueError("StructuringElement: footprint shape must be diameter x diameter")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)


@dataclass(frozen=True)
class ClaheParams:
    """Contrast-limited adaptive histogram equalization knobs.

    clip_limit is a fraction of the per-tile pixel count; each tile's
    histogram is clipped at that level and the excess spread uniformly over
    all bins before equalizing.
    """

    tile_grid: tuple[int, int] = (8, 8)
    clip_limit: float = 0.01
    bins: int = 256

    def __post_init__(self):
        rows, cols = self.tile_grid
        if rows < 2 or cols < 2:
            raise ValueError("tile_grid must be at least 2x2")
        if not self.clip_limit > 0:
            raise ValueError("clip_limit must be positive")
        if self.bins < 2:
            raise ValueError("bins must be >= 2")


def disc_se(diameter: int) -> StructuringElement:
    """Disc footprint: (x, y) belongs iff x^2 + y^2 <= (diameter/2)^2."""
    if not isinstance(diameter, (int, np.integer)) or diameter < 3 or diameter % 2 == 0:
        raise ValueError(f"disc diameter must be an odd integer >= 3, got {diameter!r}")
    r = diameter // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    member = (x * x + y * y) <= (diameter / 2.0) ** 2
    return StructuringElement(diameter=diameter, data=member)


def extract_inverted_green(img: RgbImage, mask: FovMask) -> GrayImage:
    """Inverted green channel, zeroed outside the field of view."""
    if img.shape != mask.shape:
        raise ValueError(f"image {img.shape} and mask {mask.shape} dimensions differ")
    out = np.where(mask.data, 1.0 - img.green, 0.0)
    return GrayImage(img.width, img.height, out)


def radial_pad(img: GrayImage, mask: FovMask, pad_width: int = 20) -> GrayImage:
    """Fake-pad the band just outside the FOV with boundary pixel values.

    Every exterior pixel within pad_width of the FOV receives the value of
    the nearest interior pixel along the ray from the FOV centroid through
    it (nearest-neighbor sampling while marching centroid-ward). Interior
    pixels are never modified; exterior pixels beyond the band keep their
    original value.
    """
    if img.shape != mask.shape:
        raise ValueError(f"image {img.shape} and mask {mask.shape} dimensions differ")
    if pad_width < 0:
        raise ValueError("pad_width must be non-negative")
    inside = mask.data
    if not inside.any():
        raise ValueError("radial_pad: empty FOV mask")

    out = img.data.copy()
    if pad_width == 0:
        return GrayImage(img.width, img.height, out)

    dist = ndimage.distance_transform_edt(~inside)
    band_y, band_x = np.nonzero(~inside & (dist <= pad_width))
    if band_y.size == 0:
        return GrayImage(img.width, img.height, out)

    ys_in, xs_in = np.nonzero(inside)
    cy, cx = ys_in.mean(), xs_in.mean()

    vy = band_y - cy
    vx = band_x - cx
    norm = np.hypot(vy, vx)
    norm[norm == 0] = 1.0
    uy, ux = vy / norm, vx / norm

    h, w = inside.shape
    pending = np.ones(band_y.size, dtype=bool)
    step = 0.5
    max_t = 4.0 * pad_width + 2.0
    t = step
    while pending.any() and t <= max_t:
        idx = np.nonzero(pending)[0]
        py = np.clip(np.floor(band_y[idx] - uy[idx] * t + 0.5).astype(np.intp), 0, h - 1)
        px = np.clip(np.floor(band_x[idx] - ux[idx] * t + 0.5).astype(np.intp), 0, w - 1)
        hit = inside[py, px]
        if hit.any():
            sel = idx[hit]
            out[band_y[sel], band_x[sel]] = img.data[py[hit], px[hit]]
            pending[sel] = False
        t += step
    # Pixels whose centroid ray never crossed the FOV (degenerate masks) are
    # left at their original value.
    return GrayImage(img.width, img.height, out)


def _opening(data: np.ndarray, footprint: np.ndarray) -> np.ndarray:
    eroded = ndimage.grey_erosion(data, footprint=footprint, mode="nearest")
    return ndimage.grey_dilation(eroded, footprint=footprint, mode="nearest")


def white_top_hat(img: GrayImage, se: StructuringElement) -> GrayImage:
    """Image minus its grayscale opening; keeps bright structures narrower than se."""
    if se.diameter > img.height or se.diameter > img.width:
        raise ValueError("structuring element larger than image")
    out = img.data - _opening(img.data, se.data)
    return GrayImage(img.width, img.height, out)


def _tile_edges(n: int, tiles: int) -> np.ndarray:
    return np.linspace(0, n, tiles + 1).round().astype(int)


def _interp_axis(n: int, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-coordinate (lower tile, upper tile, blend weight) along one axis."""
    coords = np.arange(n, dtype=np.float64)
    hi = np.searchsorted(centers, coords, side="right")
    lo = np.clip(hi - 1, 0, len(centers) - 1)
    hi = np.clip(hi, 0, len(centers) - 1)
    span = centers[hi] - centers[lo]
    with np.errstate(invalid="ignore", divide="ignore"):
        wt = np.where(span > 0, (coords - centers[lo]) / np.where(span > 0, span, 1.0), 0.0)
    return lo, hi, wt


def clahe(img: GrayImage, params: ClaheParams, mask: FovMask | None = None) -> GrayImage:
    """Contrast-limited adaptive histogram equalization.

    Histograms are collected per tile over mask-true pixels (all pixels when
    mask is None), clipped at clip_limit * tile pixel count with the excess
    redistributed uniformly, and turned into CDF mappings onto [0, 1]. Each
    output pixel bilinearly blends the mappings of the surrounding tile
    centers; tiles with no mask pixels fall back to an identity mapping so
    padded regions pass through smoothly.
    """
    rows, cols = params.tile_grid
    h, w = img.shape
    if rows > h or cols > w:
        raise ValueError(f"tile grid {params.tile_grid} larger than image {img.shape}")
    if mask is not None and mask.shape != img.shape:
        raise ValueError(f"image {img.shape} and mask {mask.shape} dimensions differ")
    sel = np.ones(img.shape, dtype=bool) if mask is None else mask.data

    bins = params.bins
    y_edges = _tile_edges(h, rows)
    x_edges = _tile_edges(w, cols)
    identity = (np.arange(bins, dtype=np.float64) + 0.5) / bins

    maps = np.empty((rows, cols, bins), dtype=np.float64)
    for i in range(rows):
        for j in range(cols):
            tile = img.data[y_edges[i] : y_edges[i + 1], x_edges[j] : x_edges[j + 1]]
            tile_sel = sel[y_edges[i] : y_edges[i + 1], x_edges[j] : x_edges[j + 1]]
            vals = tile[tile_sel]
            if vals.size == 0:
                maps[i, j] = identity
                continue
            idx = np.minimum((vals * bins).astype(np.intp), bins - 1)
            hist = np.bincount(idx, minlength=bins).astype(np.float64)
            clip = params.clip_limit * vals.size
            excess = np.maximum(hist - clip, 0.0).sum()
            hist = np.minimum(hist, clip) + excess / bins
            cdf = np.cumsum(hist)
            maps[i, j] = cdf / cdf[-1]

    y_centers = (y_edges[:-1] + y_edges[1:] - 1) / 2.0
    x_centers = (x_edges[:-1] + x_edges[1:] - 1) / 2.0
    r_lo, r_hi, wy = _interp_axis(h, y_centers)
    c_lo, c_hi, wx = _interp_axis(w, x_centers)

    bin_img = np.minimum((img.data * bins).astype(np.intp), bins - 1)
    r_lo = r_lo[:, None]
    r_hi = r_hi[:, None]
    wy = wy[:, None]
    c_lo = c_lo[None, :]
    c_hi = c_hi[None, :]
    wx = wx[None, :]

    top = (1.0 - wx) * maps[r_lo, c_lo, bin_img] + wx * maps[r_lo, c_hi, bin_img]
    bottom = (1.0 - wx) * maps[r_hi, c_lo, bin_img] + wx * maps[r_hi, c_hi, bin_img]
    out = (1.0 - wy) * top + wy * bottom
    return GrayImage(img.width, img.height, np.clip(out, 0.0, 1.0))
