"""Oriented matched-filter and derivative-of-Gaussian kernel construction.

The matched filter (MF) has a zero-mean Gaussian cross-section across the
vessel axis; its first derivative (FDOG) is the odd companion used to drive
the adaptive threshold. Both are sampled at integer pixel offsets over a
square L x L support; L is a free parameter, decoupled from sigma, so the
footprint always includes a band of neighborhood pixels on either side of
the vessel profile regardless of scale.

Orientation convention: at 0 degrees the vessel axis is the y-axis (the
kernel profile runs along x, so vertical structures respond). Rotations are
analytic re-evaluations of the closed-form profile at inverse-rotated
coordinates, never raster resampling, so rotated kernels carry no
interpolation error; the MF mean is re-subtracted after rotation to keep the
discrete kernel exactly zero-mean.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import io as raster_io
from .image import ResponseField, normalize_minmax


class KernelKind(enum.Enum):
    MF = "mf"
    FDOG = "fdog"


@dataclass(frozen=True)
class ScaleParams:
    """One scale of the bank: kernel side length L (odd) and Gaussian sigma.

    t is the confidence-interval factor of the classical formulation; it is
    kept for configuration completeness but the support is governed by L.
    """

    L: int
    sigma: float
    t: float = 3.0

    def __post_init__(self):
        if not isinstance(self.L, (int, np.integer)) or self.L < 3 or self.L % 2 == 0:
            raise ValueError(f"L must be an odd integer >= 3, got {self.L!r}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma!r}")
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t!r}")


def _gaussian_profile(x: np.ndarray, sigma: float) -> np.ndarray:
    return np.exp(-(x * x) / (2.0 * sigma * sigma)) / (math.sqrt(2.0 * math.pi) * sigma)


def _fdog_profile(x: np.ndarray, sigma: float) -> np.ndarray:
    return -x * np.exp(-(x * x) / (2.0 * sigma * sigma)) / (math.sqrt(2.0 * math.pi) * sigma**3)


def _sample(params: ScaleParams, kind: KernelKind, orientation: float) -> np.ndarray:
    r = params.L // 2
    y, x = np.mgrid[-r : r + 1, -r : r + 1].astype(np.float64)
    th = math.radians(orientation)
    xr = x * math.cos(th) + y * math.sin(th)
    if kind is KernelKind.MF:
        w = _gaussian_profile(xr, params.sigma)
        return w - w.mean()
    return _fdog_profile(xr, params.sigma)


@dataclass(frozen=True, eq=False)
class Kernel:
    """A sampled stencil with its generating parameters.

    Invariants: MF kernels sum to zero (the discrete mean is subtracted over
    the actual support, so smooth backgrounds are annihilated); FDOG kernels
    are antisymmetric about the vessel axis and also sum to zero.
    """

    size: int
    weights: np.ndarray
    kind: KernelKind
    orientation: float
    scale: ScaleParams

    def __post_init__(self):
        arr = np.asarray(self.weights, dtype=np.float64)
        if arr.shape != (self.size, self.size):
            raise ValueError(f"Kernel: weights shape {arr.shape} does not match size {self.size}")
        if self.size % 2 == 0:
            raise ValueError("Kernel: size must be odd")
        if not np.isfinite(arr).all():
            raise ValueError("Kernel: non-finite weights")
        if not 0.0 <= self.orientation < 180.0:
            raise ValueError(f"Kernel: orientation must lie in [0, 180), got {self.orientation}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "weights", arr)


def mf_kernel(params: ScaleParams) -> Kernel:
    """Matched-filter kernel at orientation 0 (vessel axis vertical)."""
    return Kernel(params.L, _sample(params, KernelKind.MF, 0.0), KernelKind.MF, 0.0, params)


def fdog_kernel(params: ScaleParams) -> Kernel:
    """First-derivative-of-Gaussian kernel at orientation 0."""
    return Kernel(params.L, _sample(params, KernelKind.FDOG, 0.0), KernelKind.FDOG, 0.0, params)


def rotate_kernel(kernel: Kernel, theta: float) -> Kernel:
    """Kernel of the same family re-evaluated at absolute orientation theta."""
    if not 0.0 <= theta < 180.0:
        raise ValueError(f"rotation angle must lie in [0, 180), got {theta}")
    return Kernel(
        kernel.size,
        _sample(kernel.scale, kernel.kind, theta),
        kernel.kind,
        float(theta),
        kernel.scale,
    )


@dataclass(frozen=True, eq=False)
class FilterBank:
    """All MF/FDOG kernel pairs for a set of scales and evenly spaced orientations."""

    scales: tuple[ScaleParams, ...]
    orientations: tuple[float, ...]
    mf_kernels: tuple[tuple[Kernel, ...], ...]
    fdog_kernels: tuple[tuple[Kernel, ...], ...]

    def __post_init__(self):
        n_s, n_o = len(self.scales), len(self.orientations)
        for name, grid in (("mf", self.mf_kernels), ("fdog", self.fdog_kernels)):
            if len(grid) != n_s or any(len(row) != n_o for row in grid):
                raise ValueError(f"FilterBank: {name} kernel grid is not index-aligned")

    @property
    def n_scales(self) -> int:
        return len(self.scales)

    @property
    def n_orientations(self) -> int:
        return len(self.orientations)


def build_filter_bank(scales, n_orientations: int = 12) -> FilterBank:
    """Build the full bank: n_orientations kernels per scale at k*(180/n) degrees."""
    scales = tuple(scales)
    if not scales:
        raise ValueError("at least one scale is required")
    if n_orientations < 1:
        raise ValueError("n_orientations must be >= 1")
    angles = tuple(i * 180.0 / n_orientations for i in range(n_orientations))
    mf_rows = []
    fdog_rows = []
    for s in scales:
        mf_base = mf_kernel(s)
        fdog_base = fdog_kernel(s)
        mf_rows.append(tuple(rotate_kernel(mf_base, a) for a in angles))
        fdog_rows.append(tuple(rotate_kernel(fdog_base, a) for a in angles))
    return FilterBank(scales, angles, tuple(mf_rows), tuple(fdog_rows))


def save_kernel_png(kernel: Kernel, path) -> None:
    """Debug export: kernel weights min-max stretched to an 8-bit grayscale PNG."""
    raster_io.save_gray(normalize_minmax(ResponseField.from_array(kernel.weights)), path)
