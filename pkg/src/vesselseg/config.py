"""Pipeline configuration and its flat key = value file format.

Every knob the method leaves open (threshold multiplier c, mean-filter size
w, CLAHE parameters, orientation pairing, normalization mode, ground-truth
observer) lives here so ablations need no code changes. The file format is a
flat, human-editable text file with a versioned schema field.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .kernels import FilterBank, ScaleParams, build_filter_bank
from .preprocess import ClaheParams
from .segment import NORMALIZATIONS, PAIRINGS, ThresholdParams

SCHEMA_VERSION = 1

DEFAULT_SCALES = ((9, 1.0), (13, 1.5), (17, 2.0))
OBSERVERS = ("first", "second")


@dataclass(frozen=True)
class PipelineConfig:
    scales: tuple[tuple[int, float], ...] = DEFAULT_SCALES
    t: float = 3.0
    n_orientations: int = 12
    c: float = 2.3
    w: int = 31
    se_diameter: int = 11
    clahe: ClaheParams = ClaheParams()
    pad_width: int = 20
    orientation_pairing: str = "argmax_H"
    normalization: str = "abs"
    observer: str = "first"

    def __post_init__(self):
        scales = tuple((int(L), float(sigma)) for L, sigma in self.scales)
        if not scales:
            raise ValueError("config: at least one scale is required")
        object.__setattr__(self, "scales", scales)
        self.scale_params()  # validates L/sigma/t
        self.threshold_params()  # validates c/w
        if self.n_orientations < 1:
            raise ValueError("config: n_orientations must be >= 1")
        if self.pad_width < 0:
            raise ValueError("config: pad_width must be non-negative")
        if self.se_diameter < 3 or self.se_diameter % 2 == 0:
            raise ValueError("config: se_diameter must be an odd integer >= 3")
        if self.orientation_pairing not in PAIRINGS:
            raise ValueError(f"config: orientation_pairing must be one of {PAIRINGS}")
        if self.normalization not in NORMALIZATIONS:
            raise ValueError(f"config: normalization must be one of {NORMALIZATIONS}")
        if self.observer not in OBSERVERS:
            raise ValueError(f"config: observer must be one of {OBSERVERS}")

    def scale_params(self) -> tuple[ScaleParams, ...]:
        return tuple(ScaleParams(L=L, sigma=sigma, t=self.t) for L, sigma in self.scales)

    def threshold_params(self) -> ThresholdParams:
        return ThresholdParams(c=self.c, w=self.w)

    def build_bank(self) -> FilterBank:
        return build_filter_bank(self.scale_params(), self.n_orientations)


def save_config(cfg: PipelineConfig, path: Path | str) -> None:
    lines = [
        f"schema_version = {SCHEMA_VERSION}",
        "scales = " + ",".join(f"{L}:{sigma!r}" for L, sigma in cfg.scales),
        f"t = {cfg.t!r}",
        f"n_orientations = {cfg.n_orientations}",
        f"c = {cfg.c!r}",
        f"w = {cfg.w}",
        f"se_diameter = {cfg.se_diameter}",
        f"clahe_tiles = {cfg.clahe.tile_grid[0]},{cfg.clahe.tile_grid[1]}",
        f"clahe_clip_limit = {cfg.clahe.clip_limit!r}",
        f"clahe_bins = {cfg.clahe.bins}",
        f"pad_width = {cfg.pad_width}",
        f"orientation_pairing = {cfg.orientation_pairing}",
        f"normalization = {cfg.normalization}",
        f"observer = {cfg.observer}",
    ]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def _parse_scales(text: str) -> tuple[tuple[int, float], ...]:
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        L, _, sigma = item.partition(":")
        if not sigma:
            raise ValueError(f"config: malformed scale entry {item!r}, expected L:sigma")
        pairs.append((int(L), float(sigma)))
    return tuple(pairs)


def load_config(path: Path | str) -> PipelineConfig:
    path = Path(path)
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, eq, value = line.partition("=")
        if not eq:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        entries[key.strip()] = value.strip()

    version = entries.pop("schema_version", None)
    if version is None:
        raise ValueError(f"{path}: missing schema_version field")
    if int(version) != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version}")

    kwargs: dict = {}
    clahe_kwargs: dict = {}
    for key, value in entries.items():
        if key == "scales":
            kwargs["scales"] = _parse_scales(value)
        elif key == "t":
            kwargs["t"] = float(value)
        elif key == "n_orientations":
            kwargs["n_orientations"] = int(value)
        elif key == "c":
            kwargs["c"] = float(value)
        elif key == "w":
            kwargs["w"] = int(value)
        elif key == "se_diameter":
            kwargs["se_diameter"] = int(value)
        elif key == "clahe_tiles":
            rows, _, cols = value.partition(",")
            clahe_kwargs["tile_grid"] = (int(rows), int(cols))
        elif key == "clahe_clip_limit":
            clahe_kwargs["clip_limit"] = float(value)
        elif key == "clahe_bins":
            clahe_kwargs["bins"] = int(value)
        elif key == "pad_width":
            kwargs["pad_width"] = int(value)
        elif key in ("orientation_pairing", "normalization", "observer"):
            kwargs[key] = value
        else:
            raise ValueError(f"{path}: unknown config key {key!r}")
    if clahe_kwargs:
        kwargs["clahe"] = ClaheParams(**{**dataclasses.asdict(ClaheParams()), **clahe_kwargs})
    return PipelineConfig(**kwargs)
