"""Appearance matching of landmarks over dense feature maps.

A feature map is a channel-major grid of descriptors covering an image.
Landmarks annotated on target images are transferred to a reference image
by averaging the target descriptors under each landmark and taking the
reference grid cell with the smallest cosine distance to that average.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    EmptyGalleryError,
    MixedShapesError,
    NonFiniteError,
    OutOfBoundsError,
    WrongCountError,
    ZeroQueryError,
)
from .model import NUM_LANDMARKS, LandmarkSet

# Descriptor values are float64 arrays of shape (C,).
Descriptor = np.ndarray


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Dense descriptor grid, shape (C, h, w), tied to an (H, W) image."""

    data: np.ndarray
    image_size: tuple[int, int] | None = None

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ValueError(f"feature map must be (C, h, w), got shape {data.shape}")
        if min(data.shape) < 1:
            raise ValueError(f"feature map dimensions must be positive, got {data.shape}")
        bad = ~np.isfinite(data)
        if bad.any():
            raise NonFiniteError(int(np.flatnonzero(bad)[0]), context="feature value")
        size = self.image_size
        if size is None:
            size = (data.shape[1], data.shape[2])
        size = (int(size[0]), int(size[1]))
        if min(size) < 1:
            raise ValueError(f"image_size must be positive, got {size}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "image_size", size)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def grid_height(self) -> int:
        return self.data.shape[1]

    @property
    def grid_width(self) -> int:
        return self.data.shape[2]

    @property
    def at_image_resolution(self) -> bool:
        return (self.grid_height, self.grid_width) == self.image_size


@dataclass(frozen=True, eq=False)
class AnnotatedTarget:
    """A target feature map plus the 68 landmarks annotated on its image."""

    feature_map: FeatureMap
    landmarks: LandmarkSet

    def __post_init__(self) -> None:
        h, w = self.feature_map.image_size
        pts = self.landmarks.points
        inside = (pts[:, 0] >= 0.0) & (pts[:, 0] < w) & (pts[:, 1] >= 0.0) & (pts[:, 1] < h)
        if not inside.all():
            i = int(np.flatnonzero(~inside)[0])
            raise OutOfBoundsError(tuple(pts[i]), (h, w))


def upsample_bilinear(feature_map: FeatureMap, out_h: int, out_w: int) -> FeatureMap:
    """Per-channel bilinear resize using half-pixel-center sampling.

    Destination cell (r, c) samples the source at
    ((c + 0.5) * w / out_w - 0.5, (r + 0.5) * h / out_h - 0.5), clamped to
    the source grid.
    """
    out_h = int(out_h)
    out_w = int(out_w)
    if out_h < 1 or out_w < 1:
        raise ValueError(f"output size must be positive, got ({out_h}, {out_w})")
    data = feature_map.data
    _, h, w = data.shape
    src_y = np.clip((np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5,
                    0.0, float(h - 1))
    src_x = np.clip((np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5,
                    0.0, float(w - 1))
    y0 = np.floor(src_y).astype(np.intp)
    x0 = np.floor(src_x).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (src_y - y0)[None, :, None]
    fx = (src_x - x0)[None, None, :]
    d00 = data[:, y0[:, None], x0[None, :]]
    d01 = data[:, y0[:, None], x1[None, :]]
    d10 = data[:, y1[:, None], x0[None, :]]
    d11 = data[:, y1[:, None], x1[None, :]]
    out = (1.0 - fy) * ((1.0 - fx) * d00 + fx * d01) + fy * ((1.0 - fx) * d10 + fx * d11)
    return FeatureMap(out, image_size=(out_h, out_w))


def _round_half_away(value: float) -> int:
    if value >= 0.0:
        return int(math.floor(value + 0.5))
    return -int(math.floor(-value + 0.5))


def descriptor_at(feature_map: FeatureMap, point) -> Descriptor:
    """Descriptor at the grid cell nearest to a pixel position.

    Rounds half away from zero, then clamps the cell index to the grid.
    Positions outside [-0.5, w - 0.5) x [-0.5, h - 0.5) are rejected.
    """
    x = float(point[0])
    y = float(point[1])
    _, h, w = feature_map.data.shape
    if not (-0.5 <= x < w - 0.5 and -0.5 <= y < h - 0.5):
        raise OutOfBoundsError((x, y), (h, w))
    col = min(max(_round_half_away(x), 0), w - 1)
    row = min(max(_round_half_away(y), 0), h - 1)
    return feature_map.data[:, row, col]


def _at_image_resolution(feature_map: FeatureMap) -> FeatureMap:
    if feature_map.at_image_resolution:
        return feature_map
    return upsample_bilinear(feature_map, *feature_map.image_size)


def _check_consistent(targets: Sequence[AnnotatedTarget]) -> None:
    first = targets[0].feature_map
    for target in targets[1:]:
        fm = target.feature_map
        if fm.channels != first.channels:
            raise MixedShapesError(
                f"targets mix channel counts: {fm.channels} vs {first.channels}")
        if fm.image_size != first.image_size:
            raise MixedShapesError(
                f"targets mix image sizes: {fm.image_size} vs {first.image_size}")


def average_descriptor(targets: Sequence[AnnotatedTarget], landmark_index: int) -> Descriptor:
    """Mean descriptor under one landmark across all targets.

    Each target map is brought to image resolution first. Accumulation is
    order-independent, so permuting the targets cannot change the result.
    """
    targets = list(targets)
    if not targets:
        raise EmptyGalleryError("average_descriptor needs at least one target")
    if not (0 <= landmark_index < NUM_LANDMARKS):
        raise IndexError(f"landmark index {landmark_index} outside [0, {NUM_LANDMARKS})")
    _check_consistent(targets)
    stack = np.stack([
        descriptor_at(_at_image_resolution(t.feature_map),
                      t.landmarks.points[landmark_index])
        for t in targets
    ])
    # Sort per channel so the accumulation order does not depend on the
    # target order.
    return np.sort(stack, axis=0).sum(axis=0) / len(targets)


def match_point(ref_map: FeatureMap, query: Descriptor) -> np.ndarray:
    """Grid position in the reference map closest to the query by cosine.

    The map is scanned over integer cells only; ties resolve to the
    smallest row-major index. Zero-norm cells sit at distance 2. The
    returned point is (x, y) = (col, row).
    """
    q = np.asarray(query, dtype=np.float64).reshape(-1)
    c, h, w = ref_map.data.shape
    if q.shape[0] != c:
        raise MixedShapesError(f"query length {q.shape[0]} does not match {c} channels")
    q_norm = float(np.linalg.norm(q))
    if q_norm == 0.0:
        raise ZeroQueryError("query descriptor has zero norm")
    flat = ref_map.data.reshape(c, h * w)
    dots = q @ flat
    norms = np.linalg.norm(flat, axis=0)
    zero = norms == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        distance = 1.0 - dots / (norms * q_norm)
    distance[zero] = 2.0
    index = int(np.argmin(distance))
    row, col = divmod(index, w)
    return np.array((float(col), float(row)))


def match_landmarks(ref_map: FeatureMap, targets: Sequence[AnnotatedTarget],
                    indices: Iterable[int] | None = None) -> dict[int, np.ndarray]:
    """Match the requested landmark indices onto the reference map.

    Returns {landmark index: matched (x, y)} on the reference image grid.
    Maps are brought to their image resolution once up front.
    """
    if indices is None:
        indices = range(NUM_LANDMARKS)
    wanted = [int(i) for i in indices]
    for i in wanted:
        if not (0 <= i < NUM_LANDMARKS):
            raise IndexError(f"landmark index {i} outside [0, {NUM_LANDMARKS})")
    targets = list(targets)
    if not targets:
        raise EmptyGalleryError("match_landmarks needs at least one target")
    _check_consistent(targets)
    ref = _at_image_resolution(ref_map)
    ready = [AnnotatedTarget(_at_image_resolution(t.feature_map), t.landmarks)
             for t in targets]
    return {i: match_point(ref, average_descriptor(ready, i)) for i in wanted}


def as_landmark_set(matches: Mapping[int, np.ndarray]) -> LandmarkSet:
    """Assemble a full 68-point match result into a LandmarkSet."""
    if len(matches) != NUM_LANDMARKS or set(matches) != set(range(NUM_LANDMARKS)):
        raise WrongCountError(len(matches), context="matched landmarks")
    return LandmarkSet(np.stack([np.asarray(matches[i], dtype=np.float64)
                                 for i in range(NUM_LANDMARKS)]))
