"""2-D correlation engine.

Semantics are fixed across strategies: the kernel is centered on each output
pixel (odd dimensions required), samples falling outside the image replicate
the nearest edge pixel, and no kernel flip is applied (correlation, not
convolution). Strategies:

  direct  - scipy.ndimage C loop; cheapest for small kernels/images.
  fft     - replicate-pad then frequency-domain product; the image spectrum
            is shared across a whole kernel bank, which is what makes the
            36-kernel-per-image filtering pass fast.

Both must agree with the naive quadruple-loop definition to 1e-9; the test
suite enforces this for every strategy listed in STRATEGIES.
"""
from __future__ import annotations

import numpy as np
from scipy import fft as sp_fft
from scipy import ndimage

STRATEGIES = ("direct", "fft")

# auto heuristic: frequency domain pays off once both the image and the
# kernel are non-trivial.
_FFT_MIN_IMAGE_PIXELS = 4096
_FFT_MIN_KERNEL_TAPS = 49


def _validate(img: np.ndarray, kernel: np.ndarray) -> None:
    if img.ndim != 2 or kernel.ndim != 2:
        raise ValueError("correlate2d expects 2-D arrays")
    kh, kw = kernel.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise ValueError(f"kernel dimensions must be odd, got {kernel.shape}")
    if kh > img.shape[0] or kw > img.shape[1]:
        raise ValueError(f"kernel {kernel.shape} larger than image {img.shape}")


def _pick(img: np.ndarray, kernel_shape: tuple[int, int], strategy: str) -> str:
    if strategy == "auto":
        big = img.size >= _FFT_MIN_IMAGE_PIXELS
        taps = kernel_shape[0] * kernel_shape[1] >= _FFT_MIN_KERNEL_TAPS
        return "fft" if (big and taps) else "direct"
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown convolution strategy {strategy!r}")
    return strategy


def correlate2d(img, kernel, strategy: str = "auto") -> np.ndarray:
    """Centered 2-D correlation with replicate-edge extension."""
    return correlate2d_bank(img, [kernel], strategy)[0]


def correlate2d_bank(img, kernels, strategy: str = "auto") -> list[np.ndarray]:
    """Correlate one image against several same-shaped kernels.

    With the fft strategy the padded image spectrum is computed once and
    reused for every kernel in the bank.
    """
    img = np.asarray(img, dtype=np.float64)
    kernels = [np.asarray(k, dtype=np.float64) for k in kernels]
    if not kernels:
        return []
    shape = kernels[0].shape
    for k in kernels:
        _validate(img, k)
        if k.shape != shape:
            raise ValueError("all kernels in a bank must share one shape")

    strategy = _pick(img, shape, strategy)
    if strategy == "direct":
        return [ndimage.correlate(img, k, mode="nearest") for k in kernels]

    kh, kw = shape
    ry, rx = kh // 2, kw // 2
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="edge")
    full = (padded.shape[0] + kh - 1, padded.shape[1] + kw - 1)
    fast = (sp_fft.next_fast_len(full[0], real=True), sp_fft.next_fast_len(full[1], real=True))
    spectrum = sp_fft.rfft2(padded, fast)

    h, w = img.shape
    out = []
    for k in kernels:
        kf = sp_fft.rfft2(k[::-1, ::-1], fast)  # flip: correlation via convolution
        conv = sp_fft.irfft2(spectrum * kf, fast)
        out.append(np.ascontiguousarray(conv[kh - 1 : kh - 1 + h, kw - 1 : kw - 1 + w]))
    return out


def mean_filter(field, size: int) -> np.ndarray:
    """size x size box average with replicate edges (separable moving sum)."""
    if size % 2 == 0 or size < 3:
        raise ValueError(f"mean filter size must be odd and >= 3, got {size}")
    return ndimage.uniform_filter(np.asarray(field, dtype=np.float64), size=size, mode="nearest")
