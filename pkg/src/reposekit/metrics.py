"""Accuracy metrics for landmark predictions and trajectories."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBoxError, LengthMismatchError
from .model import LandmarkSequence, LandmarkSet

# Bounding-box diagonals below this (pixels) cannot be normalized by.
BOX_FLOOR = 1e-6


def nme(pred: LandmarkSet, gt: LandmarkSet) -> float:
    """Normalized mean error in percent.

    Mean per-landmark Euclidean error divided by the diagonal of the
    ground-truth bounding box, times 100.
    """
    diff = pred.points - gt.points
    errors = np.hypot(diff[:, 0], diff[:, 1])
    span = gt.points.max(axis=0) - gt.points.min(axis=0)
    diagonal = math.hypot(span[0], span[1])
    if diagonal < BOX_FLOOR:
        raise DegenerateBoxError(f"ground-truth box diagonal {diagonal} is too small")
    return 100.0 * float(errors.mean()) / diagonal


def trajectory_error(pred: LandmarkSequence, ref: LandmarkSequence) -> float:
    """Mean Euclidean distance in pixels over all frames and landmarks."""
    if len(pred) != len(ref):
        raise LengthMismatchError(len(pred), len(ref))
    diff = pred.as_array() - ref.as_array()
    return float(np.hypot(diff[..., 0], diff[..., 1]).mean())


@dataclass(frozen=True)
class NmeReport:
    """Per-frame normalized mean errors plus their aggregate."""

    per_frame: tuple[float, ...]
    mean: float


def nme_report(pred: LandmarkSequence, gt: LandmarkSequence) -> NmeReport:
    """Frame-by-frame normalized mean error for two aligned sequences."""
    if len(pred) != len(gt):
        raise LengthMismatchError(len(pred), len(gt))
    values = tuple(nme(p, g) for p, g in zip(pred.frames, gt.frames))
    return NmeReport(values, float(np.mean(values)))
