"""Command-line pipeline: single-image segmentation, dataset runs, c tuning,
and filter-bank inspection.

Subcommands:
    segment   one image + FOV mask (+ optional ground truth)
    run       a full DRIVE split: per-image maps/overlays + metrics CSV/JSON
    tune      grid search of the threshold multiplier c on a split
    kernels   dump every bank kernel as a grayscale PNG

Dataset runs are deterministic: fixed inputs and config produce byte-identical
binary maps and reports at any --jobs value (images are independent and the
report is assembled after a sort by id).
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io as raster_io
from .config import PipelineConfig, load_config, save_config
from .dataset import DriveDataset, DriveLayoutError, DriveRecord, load_drive_dataset
from .evaluate import (
    Metrics,
    Summary,
    aggregate,
    confusion_counts,
    metrics,
    write_csv_report,
    write_json_summary,
)
from .image import BinaryMap, FovMask, RgbImage
from .kernels import save_kernel_png
from .pipeline import segment_image, threshold_bases_for_image
from .segment import binarize_bases

OVERLAY_TINT = (0.0, 0.9, 1.0)  # cyan reads well against the red-orange fundus
OVERLAY_ALPHA = 0.6


def _overlay(rgb: RgbImage, bmap: BinaryMap) -> np.ndarray:
    out = rgb.to_array().copy()
    sel = bmap.data
    for ch in range(3):
        plane = out[:, :, ch]
        plane[sel] = (1.0 - OVERLAY_ALPHA) * plane[sel] + OVERLAY_ALPHA * OVERLAY_TINT[ch]
    return out


def _load_pair(image_path, mask_path) -> tuple[RgbImage, FovMask]:
    rgb = raster_io.load_rgb(image_path)
    mask = raster_io.load_fov_mask(mask_path)
    if rgb.shape != mask.shape:
        raise ValueError(
            f"image {image_path} {rgb.shape} and mask {mask_path} {mask.shape} dimensions differ"
        )
    return rgb, mask


def _stage_writer(stage_dir: Path):
    def write(name: str, img) -> None:
        raster_io.save_gray(img, stage_dir / f"{name}.png")

    return write


def _metrics_row(image_id: str, m: Metrics) -> str:
    return f"{image_id},{m.sensitivity:.6f},{m.specificity:.6f},{m.accuracy:.6f}"


def run_single(
    image_path,
    mask_path,
    cfg: PipelineConfig,
    out_dir,
    truth_path=None,
    debug_stages: bool = False,
) -> int:
    """Segment one image; write binary map, overlay, and optional metrics CSV.

    Returns a process exit status: 0 on success, 1 on any decode/I-O error.
    All inputs are decoded and the map computed before anything is written,
    so a failed run leaves no partial outputs.
    """
    image_path, out_dir = Path(image_path), Path(out_dir)
    stem = image_path.stem
    try:
        rgb, mask = _load_pair(image_path, mask_path)
        truth = raster_io.load_binary_map(truth_path) if truth_path is not None else None
        if truth is not None and truth.shape != rgb.shape:
            raise ValueError(f"ground truth {truth_path} dimensions differ from image")

        stages: list[tuple[str, object]] = []
        hook = (lambda name, img: stages.append((name, img))) if debug_stages else None
        vessels = segment_image(rgb, mask, cfg, on_stage=hook)
        row = _metrics_row(stem, metrics(confusion_counts(vessels, truth, mask))) if truth else None
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    raster_io.save_binary(vessels, out_dir / f"{stem}_vessels.png")
    raster_io.save_rgb(_overlay(rgb, vessels), out_dir / f"{stem}_overlay.png")
    if row is not None:
        csv_path = out_dir / f"{stem}_metrics.csv"
        csv_path.parent.mkdir(parents=True, exist_ok=True)
        csv_path.write_text("id,sensitivity,specificity,accuracy\n" + row + "\n")
    for name, img in stages if debug_stages else []:
        raster_io.save_gray(img, out_dir / f"{stem}_stages" / f"{name}.png")
    return 0


def _record_worker(args) -> tuple[str, tuple[float, float, float] | None, str | None]:
    record, cfg, out_dir, debug_stages = args
    out_dir = Path(out_dir)
    try:
        rgb, mask = _load_pair(record.image_path, record.mask_path)
        truth = raster_io.load_binary_map(record.truth_path(cfg.observer))
        hook = _stage_writer(out_dir / f"{record.image_id}_stages") if debug_stages else None
        vessels = segment_image(rgb, mask, cfg, on_stage=hook)
        m = metrics(confusion_counts(vessels, truth, mask))
        raster_io.save_binary(vessels, out_dir / f"{record.image_id}_vessels.png")
        raster_io.save_rgb(_overlay(rgb, vessels), out_dir / f"{record.image_id}_overlay.png")
        return record.image_id, m.as_tuple(), None
    except (OSError, ValueError) as exc:
        return record.image_id, None, str(exc)


def run_dataset(
    ds: DriveDataset,
    cfg: PipelineConfig,
    out_dir,
    jobs: int = 1,
    debug_stages: bool = False,
) -> tuple[Summary | None, list[tuple[str, str]]]:
    """Process every record; returns (summary over successes, failures).

    Per-image failures are recorded and the run continues; callers should
    exit nonzero when the failure list is non-empty.
    """
    out_dir = Path(out_dir)
    tasks = [(record, cfg, out_dir, debug_stages) for record in ds.records]
    if jobs <= 1:
        raw = [_record_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_record_worker, tasks))

    failures = [(image_id, err) for image_id, _, err in raw if err is not None]
    ok = sorted((image_id, vals) for image_id, vals, err in raw if err is None)
    if not ok:
        return None, failures
    summary = aggregate((image_id, Metrics(*vals)) for image_id, vals in ok)
    write_csv_report(summary, out_dir / "metrics.csv", observer=cfg.observer)
    write_json_summary(summary, out_dir / "summary.json", observer=cfg.observer, split=ds.split)
    return summary, failures


def _tune_worker(args) -> tuple[str, list[tuple[float, float, float]] | None, str | None]:
    record, cfg, grid = args
    try:
        rgb, mask = _load_pair(record.image_path, record.mask_path)
        truth = raster_io.load_binary_map(record.truth_path(cfg.observer))
        bases = threshold_bases_for_image(rgb, mask, cfg)
        per_c = []
        for c in grid:
            m = metrics(confusion_counts(binarize_bases(bases, c, mask), truth, mask))
            per_c.append(m.as_tuple())
        return record.image_id, per_c, None
    except (OSError, ValueError) as exc:
        return record.image_id, None, str(exc)


def tune_c(
    ds: DriveDataset,
    cfg: PipelineConfig,
    grid,
    out_dir=None,
    jobs: int = 1,
) -> float:
    """Grid search of c maximizing mean accuracy; ties go to the smaller c.

    The filtering pass per image is c-independent, so responses are computed
    once and every grid value only re-thresholds them. The full grid table
    is written to <out_dir>/tune_table.csv when out_dir is given.
    """
    grid = sorted(float(c) for c in grid)
    if not grid:
        raise ValueError("tune_c: empty grid")
    tasks = [(record, cfg, grid) for record in ds.records]
    if jobs <= 1:
        raw = [_tune_worker(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            raw = list(pool.map(_tune_worker, tasks))

    failures = [(image_id, err) for image_id, _, err in raw if err is not None]
    if failures:
        lines = "; ".join(f"{image_id}: {err}" for image_id, err in failures)
        raise DriveLayoutError(f"tune_c: {len(failures)} image(s) failed: {lines}")

    table = np.array([per_c for _, per_c, _ in raw])  # (images, grid, 3)
    means = table.mean(axis=0)  # (grid, 3) -> se, sp, acc

    best_i = 0
    for i in range(1, len(grid)):
        if means[i, 2] > means[best_i, 2]:
            best_i = i

    if out_dir is not None:
        lines = ["c,sensitivity,specificity,accuracy"]
        lines += [
            f"{c!r},{se:.6f},{sp:.6f},{acc:.6f}" for c, (se, sp, acc) in zip(grid, means)
        ]
        path = Path(out_dir) / "tune_table.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
    return grid[best_i]


def dump_kernels(cfg: PipelineConfig, out_dir) -> None:
    out_dir = Path(out_dir)
    bank = cfg.build_bank()
    for s, scale in enumerate(bank.scales):
        for o, angle in enumerate(bank.orientations):
            tag = f"L{scale.L:02d}_s{scale.sigma:g}_a{int(round(angle)):03d}"
            save_kernel_png(bank.mf_kernels[s][o], out_dir / f"mf_{tag}.png")
            save_kernel_png(bank.fdog_kernels[s][o], out_dir / f"fdog_{tag}.png")


def parse_grid(spec: str) -> list[float]:
    """Grid spec: 'start:stop:step' (inclusive stop) or 'v1,v2,...'."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise ValueError(f"malformed grid range {spec!r}, expected start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("grid step must be positive")
        values = []
        i = 0
        while True:
            v = round(start + i * step, 10)
            if v > stop + 1e-9:
                break
            values.append(v)
            i += 1
        return values
    return [float(v) for v in spec.split(",") if v.strip()]


def _load_cfg(args) -> PipelineConfig:
    cfg = load_config(args.config) if args.config else PipelineConfig()
    observer = getattr(args, "observer", None)
    if observer is not None:
        cfg = dataclasses.replace(cfg, observer={"1": "first", "2": "second"}[observer])
    return cfg


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vesselseg", description="Retinal blood vessel segmentation pipeline"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, observer: bool = False, jobs: bool = False):
        p.add_argument("--config", type=Path, default=None, help="flat key=value config file")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        if observer:
            p.add_argument("--observer", choices=("1", "2"), default=None,
                           help="ground-truth observer (overrides config)")
        if jobs:
            p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("segment", help="segment a single image")
    p.add_argument("image", type=Path)
    p.add_argument("mask", type=Path)
    p.add_argument("--truth", type=Path, default=None, help="manual segmentation for scoring")
    p.add_argument("--debug-stages", action="store_true", help="dump intermediate stages as PNG")
    common(p)

    p = sub.add_parser("run", help="run a full DRIVE split")
    p.add_argument("root", type=Path, help="DRIVE dataset root")
    p.add_argument("--split", choices=("training", "test"), default="test")
    p.add_argument("--debug-stages", action="store_true")
    common(p, observer=True, jobs=True)

    p = sub.add_parser("tune", help="grid-search the threshold multiplier c")
    p.add_argument("root", type=Path, help="DRIVE dataset root")
    p.add_argument("--split", choices=("training", "test"), default="training")
    p.add_argument("--grid", default="1.5:3.5:0.1", help="c grid: start:stop:step or v1,v2,...")
    common(p, observer=True, jobs=True)

    p = sub.add_parser("kernels", help="dump the filter bank as PNGs")
    common(p)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = _load_cfg(args)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    if args.command == "segment":
        return run_single(args.image, args.mask, cfg, args.out,
                          truth_path=args.truth, debug_stages=args.debug_stages)

    if args.command == "run":
        try:
            ds = load_drive_dataset(args.root, args.split)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        summary, failures = run_dataset(ds, cfg, args.out, jobs=args.jobs,
                                        debug_stages=args.debug_stages)
        for image_id, err in failures:
            print(f"error: {image_id}: {err}", file=sys.stderr)
        if summary is not None:
            m = summary.mean
            print(f"average sensitivity={m.sensitivity:.4f} "
                  f"specificity={m.specificity:.4f} accuracy={m.accuracy:.4f}")
            print(f"report: {Path(args.out) / 'metrics.csv'}")
        return 1 if failures or summary is None else 0

    if args.command == "tune":
        try:
            ds = load_drive_dataset(args.root, args.split)
            grid = parse_grid(args.grid)
            best = tune_c(ds, cfg, grid, out_dir=args.out, jobs=args.jobs)
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        print(f"best c = {best!r}")
        print(f"table: {Path(args.out) / 'tune_table.csv'}")
        cfg_path = Path(args.out) / "tuned.cfg"
        save_config(dataclasses.replace(cfg, c=best), cfg_path)
        print(f"config: {cfg_path}")
        return 0

    if args.command == "kernels":
        dump_kernels(cfg, args.out)
        print(f"kernels written under {args.out}")
        return 0

    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
