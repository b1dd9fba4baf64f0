"""Raster decode/encode (PNG, TIFF, GIF) via Pillow.

DRIVE ships TIFF fundus images and GIF masks / manual segmentations; all
artifacts we emit are PNG.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image as PilImage

from .image import BinaryMap, FovMask, GrayImage, RgbImage


def _decode(path: Path | str, mode: str) -> np.ndarray:
    path = Path(path)
    try:
        with PilImage.open(path) as im:
            return np.asarray(im.convert(mode))
    except FileNotFoundError:
        raise
    except Exception as exc:  # Pillow raises a zoo of OSError/SyntaxError subclasses
        raise ValueError(f"cannot decode raster file {path}: {exc}") from exc


def load_rgb(path: Path | str) -> RgbImage:
    arr = _decode(path, "RGB").astype(np.float64) / 255.0
    return RgbImage.from_array(arr)


def load_gray(path: Path | str) -> GrayImage:
    arr = _decode(path, "L").astype(np.float64) / 255.0
    return GrayImage.from_array(arr)


def load_fov_mask(path: Path | str) -> FovMask:
    return FovMask.from_array(_decode(path, "L") >= 128)


def load_binary_map(path: Path | str) -> BinaryMap:
    return BinaryMap.from_array(_decode(path, "L") >= 128)


def _prepare(path: Path | str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def save_gray(img: GrayImage | np.ndarray, path: Path | str) -> None:
    data = img.data if isinstance(img, GrayImage) else np.asarray(img, dtype=np.float64)
    u8 = np.clip(np.rint(data * 255.0), 0, 255).astype(np.uint8)
    PilImage.fromarray(u8, mode="L").save(_prepare(path))


def save_binary(bmap: BinaryMap | np.ndarray, path: Path | str) -> None:
    data = bmap.data if isinstance(bmap, BinaryMap) else np.asarray(bmap, dtype=bool)
    PilImage.fromarray(np.where(data, 255, 0).astype(np.uint8), mode="L").save(_prepare(path))


def save_rgb(img: RgbImage | np.ndarray, path: Path | str) -> None:
    arr = img.to_array() if isinstance(img, RgbImage) else np.asarray(img, dtype=np.float64)
    u8 = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    PilImage.fromarray(u8, mode="RGB").save(_prepare(path))
