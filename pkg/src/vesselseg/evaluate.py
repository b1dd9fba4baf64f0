"""Scoring of binary vessel maps against manual ground truth.

All tallies are restricted to field-of-view pixels; the exterior is trivially
background and would inflate accuracy and specificity. Summaries report the
arithmetic mean and the population standard deviation of the per-image
metrics.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .image import BinaryMap, FovMask


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    tn: int
    fn: int

    def __post_init__(self):
        for name in ("tp", "fp", "tn", "fn"):
            if getattr(self, name) < 0:
                raise ValueError(f"ConfusionCounts.{name} must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn


@dataclass(frozen=True)
class Metrics:
    sensitivity: float
    specificity: float
    accuracy: float

    def __post_init__(self):
        for name in ("sensitivity", "specificity", "accuracy"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"Metrics.{name} must lie in [0, 1], got {v!r}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.sensitivity, self.specificity, self.accuracy)


@dataclass(frozen=True)
class Summary:
    per_image: tuple[tuple[str, Metrics], ...]
    mean: Metrics
    std_dev: Metrics


def confusion_counts(pred: BinaryMap, truth: BinaryMap, mask: FovMask) -> ConfusionCounts:
    """Pixel tallies over mask-true pixels only."""
    if pred.shape != truth.shape or pred.shape != mask.shape:
        raise ValueError("confusion_counts: pred, truth and mask must share dimensions")
    p = pred.data[mask.data]
    t = truth.data[mask.data]
    return ConfusionCounts(
        tp=int(np.count_nonzero(p & t)),
        fp=int(np.count_nonzero(p & ~t)),
        tn=int(np.count_nonzero(~p & ~t)),
        fn=int(np.count_nonzero(~p & t)),
    )


def metrics(counts: ConfusionCounts) -> Metrics:
    """Sensitivity tp/(tp+fn), specificity tn/(fp+tn), accuracy (tp+tn)/total."""
    pos = counts.tp + counts.fn
    neg = counts.fp + counts.tn
    if pos == 0 or neg == 0:
        raise ValueError(
            f"degenerate confusion counts (positives={pos}, negatives={neg}): "
            "sensitivity/specificity undefined"
        )
    return Metrics(
        sensitivity=counts.tp / pos,
        specificity=counts.tn / neg,
        accuracy=(counts.tp + counts.tn) / counts.total,
    )


def aggregate(results) -> Summary:
    """Per-metric arithmetic mean and population standard deviation."""
    results = tuple((str(image_id), m) for image_id, m in results)
    if not results:
        raise ValueError("aggregate: empty result list")
    table = np.array([m.as_tuple() for _, m in results], dtype=np.float64)
    mean = table.mean(axis=0)
    std = table.std(axis=0, ddof=0)
    return Summary(
        per_image=results,
        mean=Metrics(*mean),
        std_dev=Metrics(*std),
    )


def _row(label: str, m: Metrics) -> str:
    return f"{label},{m.sensitivity:.6f},{m.specificity:.6f},{m.accuracy:.6f}"


def write_csv_report(summary: Summary, path: Path | str, observer: str = "first") -> None:
    """Per-image Se/Sp/Acc rows followed by average and std_dev rows."""
    lines = [
        f"# fov-restricted metrics; std_dev=population; observer={observer}",
        "id,sensitivity,specificity,accuracy",
    ]
    lines += [_row(image_id, m) for image_id, m in summary.per_image]
    lines.append(_row("average", summary.mean))
    lines.append(_row("std_dev", summary.std_dev))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")


def write_json_summary(
    summary: Summary, path: Path | str, observer: str = "first", split: str | None = None
) -> None:
    def as_dict(m: Metrics) -> dict:
        return {"sensitivity": m.sensitivity, "specificity": m.specificity, "accuracy": m.accuracy}

    payload = {
        "observer": observer,
        "std_dev_kind": "population",
        "split": split,
        "per_image": [{"id": image_id, **as_dict(m)} for image_id, m in summary.per_image],
        "mean": as_dict(summary.mean),
        "std_dev": as_dict(summary.std_dev),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
