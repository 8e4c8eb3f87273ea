"""Core domain types for 68-point facial landmark processing.

Coordinates follow the image convention: x grows rightward, y grows
downward, units are pixels. A landmark set holds exactly 68 points
partitioned into five facial parts over fixed contiguous index ranges.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Mapping

import numpy as np

from .errors import NonFiniteError, WrongCountError

NUM_LANDMARKS = 68

# Point2 values are float64 arrays of shape (2,) holding (x, y) pixels.
Point2 = np.ndarray


class FacialPart(Enum):
    """Facial regions of the 68-point annotation scheme."""

    EYES = "eyes"
    MOUTH = "mouth"
    NOSE = "nose"
    EYEBROWS = "eyebrows"
    FACE_BOUNDARY = "face_boundary"


# Canonical contiguous index ranges (start, stop) per part; stop exclusive.
PART_RANGES: dict[FacialPart, tuple[int, int]] = {
    FacialPart.FACE_BOUNDARY: (0, 17),
    FacialPart.EYEBROWS: (17, 27),
    FacialPart.NOSE: (27, 36),
    FacialPart.EYES: (36, 48),
    FacialPart.MOUTH: (48, 68),
}

# Default frame endpoints per part: the two landmarks whose segment fixes
# the part's local axis (leftmost/rightmost extremity of the part).
DEFAULT_ENDPOINTS: dict[FacialPart, tuple[int, int]] = {
    FacialPart.FACE_BOUNDARY: (0, 16),
    FacialPart.EYEBROWS: (17, 26),
    FacialPart.NOSE: (31, 35),
    FacialPart.EYES: (36, 45),
    FacialPart.MOUTH: (48, 54),
}


@dataclass(frozen=True)
class PartSpec:
    """Index range [start, stop) plus the two frame-defining endpoints."""

    start: int
    stop: int
    endpoint_a: int
    endpoint_b: int

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.stop <= NUM_LANDMARKS):
            raise ValueError(f"invalid landmark range [{self.start}, {self.stop})")
        for e in (self.endpoint_a, self.endpoint_b):
            if not (self.start <= e < self.stop):
                raise ValueError(f"endpoint {e} outside range [{self.start}, {self.stop})")
        if self.endpoint_a == self.endpoint_b:
            raise ValueError("frame endpoints must be distinct")

    @property
    def count(self) -> int:
        return self.stop - self.start

    @property
    def indices(self) -> range:
        return range(self.start, self.stop)

    @property
    def as_slice(self) -> slice:
        return slice(self.start, self.stop)


@dataclass(frozen=True)
class PartLayout:
    """Assignment of the 68 indices to parts with per-part frame endpoints.

    Index ranges are pinned to the canonical partition; only the endpoint
    choice is configurable.
    """

    parts: Mapping[FacialPart, PartSpec]

    def __post_init__(self) -> None:
        specs = dict(self.parts)
        missing = [p for p in FacialPart if p not in specs]
        if missing:
            raise ValueError(f"layout missing parts: {[p.value for p in missing]}")
        if len(specs) != len(FacialPart):
            raise ValueError("layout contains unknown parts")
        for part, spec in specs.items():
            if (spec.start, spec.stop) != PART_RANGES[part]:
                raise ValueError(
                    f"part {part.value} must cover {PART_RANGES[part]}, "
                    f"got ({spec.start}, {spec.stop})"
                )
        object.__setattr__(self, "parts", specs)

    @classmethod
    def ibug68(cls, endpoints: Mapping[FacialPart, tuple[int, int]] | None = None) -> "PartLayout":
        """Canonical layout; optionally override frame endpoints per part."""
        chosen = dict(DEFAULT_ENDPOINTS)
        if endpoints:
            chosen.update(endpoints)
        return cls({
            part: PartSpec(*PART_RANGES[part], *chosen[part]) for part in FacialPart
        })

    def spec(self, part: FacialPart) -> PartSpec:
        return self.parts[part]

    def endpoints(self, part: FacialPart) -> tuple[int, int]:
        spec = self.parts[part]
        return spec.endpoint_a, spec.endpoint_b


@dataclass(frozen=True, eq=False)
class LandmarkSet:
    """One frame of exactly 68 finite landmark points, shape (68, 2)."""

    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError(f"landmark points must have shape (N, 2), got {pts.shape}")
        if pts.shape[0] != NUM_LANDMARKS:
            raise WrongCountError(pts.shape[0])
        finite = np.isfinite(pts).all(axis=1)
        if not finite.all():
            raise NonFiniteError(int(np.flatnonzero(~finite)[0]))
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def part(self, part: FacialPart) -> np.ndarray:
        return part_slice(self, part)


def validate_landmark_set(points) -> LandmarkSet:
    """Build a LandmarkSet from 68 (x, y) pairs, checking count and finiteness."""
    return LandmarkSet(points)


def part_slice(landmarks: LandmarkSet, part: FacialPart) -> np.ndarray:
    """Points of one facial part in index order; shape (count, 2) view."""
    start, stop = PART_RANGES[part]
    return landmarks.points[start:stop]


@dataclass(frozen=True, eq=False)
class LandmarkSequence:
    """Ordered landmark frames sampled at a fixed rate."""

    frames: tuple[LandmarkSet, ...]
    fps: float = 25.0

    def __post_init__(self) -> None:
        frames = tuple(
            f if isinstance(f, LandmarkSet) else LandmarkSet(f) for f in self.frames
        )
        if not frames:
            raise ValueError("a landmark sequence needs at least one frame")
        fps = float(self.fps)
        if not np.isfinite(fps) or fps <= 0.0:
            raise ValueError(f"fps must be finite and positive, got {fps}")
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "fps", fps)

    def __len__(self) -> int:
        return len(self.frames)

    def __iter__(self) -> Iterator[LandmarkSet]:
        return iter(self.frames)

    def __getitem__(self, index: int) -> LandmarkSet:
        return self.frames[index]

    def as_array(self) -> np.ndarray:
        """Stacked coordinates, shape (M, 68, 2)."""
        return np.stack([f.points for f in self.frames])

    @classmethod
    def from_array(cls, array, fps: float = 25.0) -> "LandmarkSequence":
        arr = np.asarray(array, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError(f"expected (M, 68, 2) array, got shape {arr.shape}")
        return cls(tuple(LandmarkSet(frame) for frame in arr), fps=fps)
