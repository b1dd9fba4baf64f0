"""DRIVE dataset discovery and validation.

Expected layout under the dataset root (the published archive layout):

    <root>/
      training/{images, mask, 1st_manual}
      test/{images, mask, 1st_manual[, 2nd_manual]}

Image dimensions are always read from the files themselves, never assumed.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from PIL import Image as PilImage

SPLITS = ("training", "test")
_RASTER_EXTS = (".tif", ".tiff", ".png", ".gif", ".bmp", ".ppm", ".jpg", ".jpeg")


class DriveLayoutError(ValueError):
    """A DRIVE directory is missing, incomplete, or undecodable."""


def _expected_ids(split: str) -> tuple[str, ...]:
    if split == "test":
        return tuple(f"{i:02d}_test" for i in range(1, 21))
    return tuple(f"{i}_training" for i in range(21, 41))


@dataclass(frozen=True)
class DriveRecord:
    image_id: str
    image_path: Path
    mask_path: Path
    manual1_path: Path
    manual2_path: Path | None

    def truth_path(self, observer: str = "first") -> Path:
        if observer == "first":
            return self.manual1_path
        if observer == "second":
            if self.manual2_path is None:
                raise DriveLayoutError(
                    f"{self.image_id}: no second-observer segmentation available"
                )
            return self.manual2_path
        raise ValueError(f"unknown observer {observer!r}")


@dataclass(frozen=True)
class DriveDataset:
    root: Path
    split: str
    records: tuple[DriveRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def _find_raster(directory: Path, stem: str) -> Path | None:
    for ext in _RASTER_EXTS:
        candidate = directory / f"{stem}{ext}"
        if candidate.is_file():
            return candidate
    return None


def _check_decodes(path: Path) -> None:
    try:
        with PilImage.open(path) as im:
            im.verify()
    except Exception as exc:
        raise DriveLayoutError(f"undecodable raster file {path}: {exc}") from exc


def load_drive_dataset(root: Path | str, split: str) -> DriveDataset:
    """Resolve and validate all 20 records of one split, sorted by id."""
    root = Path(root)
    if split not in SPLITS:
        raise ValueError(f"split must be one of {SPLITS}, got {split!r}")
    images_dir = root / split / "images"
    if not images_dir.is_dir():
        raise DriveLayoutError(f"missing images directory: {images_dir}")

    found = {
        p.stem: p for p in images_dir.iterdir() if p.is_file() and p.suffix.lower() in _RASTER_EXTS
    }
    expected = _expected_ids(split)
    missing = [s for s in expected if s not in found]
    extra = sorted(set(found) - set(expected))
    if missing or extra:
        parts = [f"expected 20 images in {images_dir}, found {len(found)}"]
        if missing:
            parts.append(f"missing ids: {', '.join(missing)}")
        if extra:
            parts.append(f"unexpected files: {', '.join(extra)}")
        raise DriveLayoutError("; ".join(parts))

    records = []
    for stem in expected:
        image_path = found[stem]
        number = stem.split("_")[0]
        mask_path = _find_raster(root / split / "mask", f"{stem}_mask")
        if mask_path is None:
            raise DriveLayoutError(f"missing FOV mask for {stem} under {root / split / 'mask'}")
        manual1 = _find_raster(root / split / "1st_manual", f"{number}_manual1")
        if manual1 is None:
            raise DriveLayoutError(
                f"missing manual segmentation for {stem} under {root / split / '1st_manual'}"
            )
        manual2 = _find_raster(root / split / "2nd_manual", f"{number}_manual2")
        for p in (image_path, mask_path, manual1, *([manual2] if manual2 else [])):
            _check_decodes(p)
        records.append(
            DriveRecord(
                image_id=stem,
                image_path=image_path,
                mask_path=mask_path,
                manual1_path=manual1,
                manual2_path=manual2,
            )
        )
    return DriveDataset(root=root, split=split, records=tuple(records))
