"""Core image containers and pixel utilities shared by the whole pipeline.

All pixel data is double precision. Grayscale values live in [0, 1]; 8-bit
sources are divided by 255 on load. Containers are immutable value objects:
the wrapped arrays are contiguous copies with the writeable flag cleared, so
instances can be shared freely across threads. All operations are pure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Constructors tolerate this much overshoot from float round-off before
# rejecting; anything inside the band is clipped back into [0, 1].
_RANGE_TOL = 1e-9


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


def _check_shape(name: str, data: np.ndarray, width: int, height: int) -> None:
    if width <= 0 or height <= 0:
        raise ValueError(f"{name}: width and height must be positive, got {width}x{height}")
    if data.shape != (height, width):
        raise ValueError(
            f"{name}: data shape {data.shape} does not match height={height}, width={width}"
        )


def _unit_grid(name: str, data, width: int, height: int) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    _check_shape(name, arr, width, height)
    if not np.isfinite(arr).all():
        raise ValueError(f"{name}: non-finite pixel values")
    if arr.size and (arr.min() < -_RANGE_TOL or arr.max() > 1.0 + _RANGE_TOL):
        raise ValueError(f"{name}: pixel values outside [0, 1]")
    return _freeze(np.clip(arr, 0.0, 1.0))


def _bool_grid(name: str, data, width: int, height: int) -> np.ndarray:
    arr = np.asarray(data)
    _check_shape(name, arr, width, height)
    return _freeze(arr.astype(bool))


@dataclass(frozen=True, eq=False)
class GrayImage:
    """2-D scalar field with values in [0, 1], stored row-major (height, width)."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _unit_grid("GrayImage", self.data, self.width, self.height))

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("GrayImage.from_array expects a 2-D array")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class RgbImage:
    """Three aligned channel planes, each in [0, 1]."""

    width: int
    height: int
    red: np.ndarray
    green: np.ndarray
    blue: np.ndarray

    def __post_init__(self):
        for name in ("red", "green", "blue"):
            plane = _unit_grid(f"RgbImage.{name}", getattr(self, name), self.width, self.height)
            object.__setattr__(self, name, plane)

    @classmethod
    def from_array(cls, arr) -> "RgbImage":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError("RgbImage.from_array expects an (H, W, 3) array")
        h, w = arr.shape[:2]
        return cls(width=w, height=h, red=arr[:, :, 0], green=arr[:, :, 1], blue=arr[:, :, 2])

    def to_array(self) -> np.ndarray:
        return np.stack([self.red, self.green, self.blue], axis=-1)

    @property
    def shape(self) -> tuple[int, int]:
        return self.red.shape


@dataclass(frozen=True, eq=False)
class FovMask:
    """Boolean field-of-view mask; True marks pixels inside the camera aperture."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _bool_grid("FovMask", self.data, self.width, self.height))

    @classmethod
    def from_array(cls, arr) -> "FovMask":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("FovMask.from_array expects a 2-D array")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @classmethod
    def full(cls, width: int, height: int) -> "FovMask":
        return cls(width=width, height=height, data=np.ones((height, width), dtype=bool))

    @property
    def n_inside(self) -> int:
        return int(np.count_nonzero(self.data))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class BinaryMap:
    """Per-pixel vessel / background decision; True marks vessel."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "data", _bool_grid("BinaryMap", self.data, self.width, self.height))

    @classmethod
    def from_array(cls, arr) -> "BinaryMap":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise ValueError("BinaryMap.from_array expects a 2-D array")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @property
    def n_vessel(self) -> int:
        return int(np.count_nonzero(self.data))

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


@dataclass(frozen=True, eq=False)
class ResponseField:
    """Signed, unbounded scalar field (filter responses, threshold surfaces)."""

    width: int
    height: int
    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        _check_shape("ResponseField", arr, self.width, self.height)
        if not np.isfinite(arr).all():
            raise ValueError("ResponseField: non-finite values")
        object.__setattr__(self, "data", _freeze(arr))

    @classmethod
    def from_array(cls, arr) -> "ResponseField":
        arr = np.asarray(arr, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError("ResponseField.from_array expects a 2-D array")
        return cls(width=arr.shape[1], height=arr.shape[0], data=arr)

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape


def normalize_minmax(field: ResponseField) -> GrayImage:
    """Affine rescale of a response field onto [0, 1].

    A constant field carries no contrast information and maps to all zeros
    (this also avoids the zero division).
    """
    lo = float(field.data.min())
    hi = float(field.data.max())
    if hi <= lo:
        out = np.zeros_like(field.data)
    else:
        out = (field.data - lo) / (hi - lo)
    return GrayImage(field.width, field.height, out)


def invert(img: GrayImage) -> GrayImage:
    """Photometric inversion: v -> 1 - v."""
    return GrayImage(img.width, img.height, 1.0 - img.data)
