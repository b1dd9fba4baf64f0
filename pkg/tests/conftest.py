"""Shared fixtures, phantom builders, and independent oracles.

The oracles here deliberately re-implement operations from first principles
(quadruple-loop correlation, offset-loop min/max morphology, per-pixel
tallies) so the optimized library paths are checked against something that
cannot share their bugs.
"""
from __future__ import annotations

import os
from pathlib import Path

import numpy as np
import pytest
from PIL import Image as PilImage
from scipy import ndimage

import vesselseg as vs

SEED = 20260809


# ---------------------------------------------------------------- oracles


def naive_correlate2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Quadruple-loop centered correlation with replicate-edge extension."""
    h, w = img.shape
    kh, kw = kernel.shape
    ry, rx = kh // 2, kw // 2
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            acc = 0.0
            for i in range(kh):
                for j in range(kw):
                    yy = min(max(y + i - ry, 0), h - 1)
                    xx = min(max(x + j - rx, 0), w - 1)
                    acc += img[yy, xx] * kernel[i, j]
            out[y, x] = acc
    return out


def _brute_morph(img: np.ndarray, footprint: np.ndarray, reduce_fn) -> np.ndarray:
    kh, kw = footprint.shape
    ry, rx = kh // 2, kw // 2
    padded = np.pad(img, ((ry, ry), (rx, rx)), mode="edge")
    h, w = img.shape
    out = None
    for i in range(kh):
        for j in range(kw):
            if not footprint[i, j]:
                continue
            view = padded[i : i + h, j : j + w]
            out = view.copy() if out is None else reduce_fn(out, view)
    return out


def brute_erosion(img, footprint):
    return _brute_morph(img, footprint, np.minimum)


def brute_dilation(img, footprint):
    return _brute_morph(img, footprint, np.maximum)


def brute_white_top_hat(img, footprint):
    return img - brute_dilation(brute_erosion(img, footprint), footprint)


# --------------------------------------------------------------- phantoms


def gaussian_ridge(size: int = 128, sigma: float = 1.5, amplitude: float = 0.5) -> vs.GrayImage:
    """Vertical Gaussian ridge through the center column."""
    x = np.arange(size)
    profile = amplitude * np.exp(-((x - size // 2) ** 2) / (2.0 * sigma * sigma))
    return vs.GrayImage.from_array(np.tile(profile, (size, 1)))


def step_edge(size: int = 128, amplitude: float = 0.5) -> vs.GrayImage:
    """Vertical step: dark left half, bright right half."""
    x = np.arange(size)
    return vs.GrayImage.from_array(np.tile(np.where(x >= size // 2, amplitude, 0.0), (size, 1)))


def as_fundus_rgb(target_inverted_green: vs.GrayImage) -> vs.RgbImage:
    """RGB input whose inverted green channel equals the given phantom."""
    g = 1.0 - target_inverted_green.data
    return vs.RgbImage(
        target_inverted_green.width,
        target_inverted_green.height,
        red=np.clip(g * 1.1, 0, 1),
        green=g,
        blue=np.clip(g * 0.4, 0, 1),
    )


def synth_fundus(rng: np.random.Generator, size: int = 96):
    """Synthetic retina: circular FOV, smooth background, dark vessel tree.

    Returns (rgb float array, fov bool array, vessel ground-truth bool array).
    """
    yy, xx = np.mgrid[:size, :size]
    cy = cx = (size - 1) / 2
    fov = (yy - cy) ** 2 + (xx - cx) ** 2 <= (0.46 * size) ** 2

    vessels = np.zeros((size, size), dtype=bool)
    for _ in range(6):
        ang = rng.uniform(0, 2 * np.pi)
        py, px = cy + rng.normal(0, 3), cx + rng.normal(0, 3)
        width = rng.uniform(1.2, 3.2)
        for _step in range(int(size * 0.42)):
            ang += rng.normal(0, 0.12)
            py += np.sin(ang)
            px += np.cos(ang)
            iy, ix = int(round(py)), int(round(px))
            if not (0 <= iy < size and 0 <= ix < size):
                break
            r = max(1, int(round(width / 2)))
            vessels[max(0, iy - r) : iy + r + 1, max(0, ix - r) : ix + r + 1] = True
            width = max(1.0, width - 0.01)
    vessels = ndimage.binary_opening(vessels, np.ones((2, 2)))

    bg = 0.62 + ndimage.gaussian_filter(rng.normal(0, 1, (size, size)), 8) * 0.12
    g = np.clip(bg, 0.3, 0.9)
    g[vessels] -= 0.22
    g = np.clip(g + rng.normal(0, 0.01, (size, size)), 0, 1)
    g[~fov] = 0.04
    rgb = np.stack([np.clip(g + 0.2, 0, 1), g, np.clip(g * 0.35, 0, 1)], axis=-1)
    return rgb, fov, vessels & fov


def _write_drive_record(rng, directory: Path, split: str, stem: str, size: int) -> None:
    rgb, fov, truth = synth_fundus(rng, size)
    number = stem.split("_")[0]
    u8 = np.clip(np.rint(rgb * 255), 0, 255).astype(np.uint8)
    PilImage.fromarray(u8, mode="RGB").save(directory / split / "images" / f"{stem}.tif")
    PilImage.fromarray(np.where(fov, 255, 0).astype(np.uint8), mode="L").save(
        directory / split / "mask" / f"{stem}_mask.gif"
    )
    PilImage.fromarray(np.where(truth, 255, 0).astype(np.uint8), mode="L").save(
        directory / split / "1st_manual" / f"{number}_manual1.gif"
    )
    if split == "test":
        # second observer: a slightly dilated variant
        alt = ndimage.binary_dilation(truth) & fov
        PilImage.fromarray(np.where(alt, 255, 0).astype(np.uint8), mode="L").save(
            directory / split / "2nd_manual" / f"{number}_manual2.gif"
        )


def make_drive_tree(root: Path, size: int = 96, seed: int = SEED) -> Path:
    rng = np.random.default_rng(seed)
    for split in ("training", "test"):
        for sub in ("images", "mask", "1st_manual") + (("2nd_manual",) if split == "test" else ()):
            (root / split / sub).mkdir(parents=True, exist_ok=True)
    for i in range(21, 41):
        _write_drive_record(rng, root, "training", f"{i}_training", size)
    for i in range(1, 21):
        _write_drive_record(rng, root, "test", f"{i:02d}_test", size)
    return root


# ---------------------------------------------------------------- fixtures


@pytest.fixture(scope="session")
def synthetic_drive(tmp_path_factory) -> Path:
    """A full DRIVE-layout tree of small synthetic retinas (20 + 20)."""
    return make_drive_tree(tmp_path_factory.mktemp("drive_synth"))


@pytest.fixture(scope="session")
def fundus_case():
    """One synthetic retina as domain objects: (RgbImage, FovMask, BinaryMap)."""
    rgb, fov, truth = synth_fundus(np.random.default_rng(SEED), size=128)
    return (
        vs.RgbImage.from_array(rgb),
        vs.FovMask.from_array(fov),
        vs.BinaryMap.from_array(truth),
    )


@pytest.fixture(scope="session")
def default_bank():
    return vs.PipelineConfig().build_bank()


@pytest.fixture(scope="session")
def drive_root() -> Path:
    """Real DRIVE dataset root, when provided; otherwise skip the test.

    Set DRIVE_ROOT=/path/to/DRIVE (the directory containing training/ and
    test/) or place the dataset at ./data/DRIVE.
    """
    candidates = []
    env = os.environ.get("DRIVE_ROOT")
    if env:
        candidates.append(Path(env))
    candidates.append(Path(__file__).resolve().parent.parent / "data" / "DRIVE")
    for root in candidates:
        if (root / "test" / "images").is_dir():
            return root
    pytest.skip(
        "DRIVE dataset not available: set DRIVE_ROOT or place it under data/DRIVE "
        "(registration-gated; cannot be bundled with the repository)"
    )
