"""Two-stage motion retargeting between 68-point landmark sequences.

Stage one transfers the head-level rigid delta measured between two
driving frames onto the reference. Stage two transfers, per facial part,
the residual part-frame motion left over after stage one, scaled by the
reference/driving part-extent ratio. Individual landmarks then follow
per-axis coordinate ratios inside their part frames.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateEndpointsError, DivergentRatioError, NonFiniteError
from .geometry import (
    CoordinateFrame,
    frame_from_endpoints,
    from_local,
    to_local,
    wrap_angle,
)
from .model import FacialPart, LandmarkSet, LandmarkSequence, PartLayout

# Driving part extents below this (pixels) force the scale ratio to 1.
EXTENT_FLOOR = 1e-6

# Default threshold on frame-0 local coordinates below which the per-axis
# ratio update falls back to a scaled additive offset.
RATIO_EPSILON = 1e-3


@dataclass(frozen=True, eq=False)
class MotionDelta:
    """Rigid frame-to-frame motion: origin shift plus wrapped angle delta."""

    delta_origin: np.ndarray
    delta_angle: float

    def __post_init__(self) -> None:
        shift = np.array(self.delta_origin, dtype=np.float64).reshape(2)
        if not np.isfinite(shift).all():
            raise NonFiniteError(tuple(shift), context="origin delta")
        angle = float(self.delta_angle)
        if not math.isfinite(angle):
            raise NonFiniteError(angle, context="angle delta")
        shift.setflags(write=False)
        object.__setattr__(self, "delta_origin", shift)
        object.__setattr__(self, "delta_angle", wrap_angle(angle))


@dataclass(frozen=True)
class RetargetConfig:
    """Knobs for the retargeting engine.

    ratio_epsilon: per-axis threshold switching the point update from a
        coordinate ratio to an additive offset.
    scale_global_translation: when true, the stage-one origin shift is
        scaled by the face-boundary extent ratio.
    part_layout: part ranges and frame endpoints.
    """

    ratio_epsilon: float = RATIO_EPSILON
    scale_global_translation: bool = False
    part_layout: PartLayout = field(default_factory=PartLayout.ibug68)

    def __post_init__(self) -> None:
        if not (math.isfinite(self.ratio_epsilon) and self.ratio_epsilon > 0.0):
            raise ValueError(f"ratio_epsilon must be positive, got {self.ratio_epsilon}")


def global_frame(landmarks: LandmarkSet, layout: PartLayout | None = None) -> CoordinateFrame:
    """Head-level frame built from the face-boundary endpoints."""
    layout = layout or PartLayout.ibug68()
    ia, ib = layout.endpoints(FacialPart.FACE_BOUNDARY)
    try:
        return frame_from_endpoints(landmarks.points[ia], landmarks.points[ib])
    except DegenerateEndpointsError as exc:
        raise DegenerateEndpointsError(part=FacialPart.FACE_BOUNDARY) from exc


def global_delta(driving_0: LandmarkSet, driving_m: LandmarkSet,
                 layout: PartLayout | None = None) -> MotionDelta:
    """Rigid head motion of the driving face between frame 0 and frame m."""
    layout = layout or PartLayout.ibug68()
    f0 = global_frame(driving_0, layout)
    fm = global_frame(driving_m, layout)
    return MotionDelta(fm.origin - f0.origin, wrap_angle(fm.angle - f0.angle))


def _moved_global_frame(base: CoordinateFrame, delta: MotionDelta) -> CoordinateFrame:
    return CoordinateFrame(base.origin + delta.delta_origin,
                           wrap_angle(base.angle + delta.delta_angle))


def apply_global(ref_0: LandmarkSet, delta: MotionDelta,
                 layout: PartLayout | None = None) -> LandmarkSet:
    """Move all 68 reference points rigidly by the given frame delta."""
    layout = layout or PartLayout.ibug68()
    frame_0 = global_frame(ref_0, layout)
    frame_m = _moved_global_frame(frame_0, delta)
    return LandmarkSet(from_local(frame_m, to_local(frame_0, ref_0.points)))


def part_extent(points, frame: CoordinateFrame) -> float:
    """Largest Euclidean distance from the frame origin to any point."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("part_extent needs a non-empty (N, 2) array")
    return float(np.hypot(pts[:, 0] - frame.origin[0], pts[:, 1] - frame.origin[1]).max())


def _part_frame(landmarks: LandmarkSet, layout: PartLayout,
                part: FacialPart) -> CoordinateFrame:
    ia, ib = layout.endpoints(part)
    try:
        return frame_from_endpoints(landmarks.points[ia], landmarks.points[ib])
    except DegenerateEndpointsError as exc:
        raise DegenerateEndpointsError(part=part) from exc


def retarget_frame(ref_0: LandmarkSet, driving_0: LandmarkSet,
                   driving_m: LandmarkSet,
                   config: RetargetConfig | None = None) -> LandmarkSet:
    """Repose the reference with the driving motion from frame 0 to frame m.

    Feeding the same set as reference and driving frame 0 reproduces the
    driving frame m up to floating-point error; a motionless driving pair
    reproduces the reference.
    """
    config = config or RetargetConfig()
    layout = config.part_layout

    g_d0 = global_frame(driving_0, layout)
    g_dm = global_frame(driving_m, layout)
    g_r0 = global_frame(ref_0, layout)
    delta = MotionDelta(g_dm.origin - g_d0.origin, wrap_angle(g_dm.angle - g_d0.angle))

    fb = FacialPart.FACE_BOUNDARY
    extents: dict[FacialPart, float] = {}
    frames_r0: dict[FacialPart, CoordinateFrame] = {}
    frames_d0: dict[FacialPart, CoordinateFrame] = {}
    for part in FacialPart:
        frames_r0[part] = _part_frame(ref_0, layout, part)
        frames_d0[part] = _part_frame(driving_0, layout, part)
        spec = layout.spec(part)
        b_ref = part_extent(ref_0.points[spec.as_slice], frames_r0[part])
        b_dri = part_extent(driving_0.points[spec.as_slice], frames_d0[part])
        extents[part] = 1.0 if b_dri < EXTENT_FLOOR else b_ref / b_dri

    if config.scale_global_translation:
        delta = MotionDelta(delta.delta_origin * extents[fb], delta.delta_angle)

    moved = apply_global(ref_0, delta, layout)
    g_rm = _moved_global_frame(g_r0, delta)

    out = np.empty((len(ref_0.points), 2))
    for part in FacialPart:
        spec = layout.spec(part)
        sl = spec.as_slice
        f_d0 = frames_d0[part]
        f_dm = _part_frame(driving_m, layout, part)
        f_r0 = frames_r0[part]
        f_moved = _part_frame(moved, layout, part)
        scale = extents[part]

        # Residual part motion, expressed in head-frame local coordinates so
        # the rigid delta already applied in stage one is not counted twice.
        du = to_local(g_dm, f_dm.origin) - to_local(g_d0, f_d0.origin)
        dphi = wrap_angle(wrap_angle(f_dm.angle - g_dm.angle)
                          - wrap_angle(f_d0.angle - g_d0.angle))
        origin_m = from_local(g_rm, to_local(g_rm, f_moved.origin) + scale * du)
        f_rm = CoordinateFrame(origin_m, wrap_angle(f_moved.angle + dphi))

        a = to_local(f_d0, driving_0.points[sl])
        b = to_local(f_dm, driving_m.points[sl])
        r = to_local(f_r0, ref_0.points[sl])
        # Branch on frame-0 driving coordinates only; epsilon guards the
        # near-axis ratios.
        use_ratio = np.abs(a) >= config.ratio_epsilon
        safe_a = np.where(use_ratio, a, 1.0)
        local = np.where(use_ratio, (b / safe_a) * r, r + scale * (b - a))
        bad = ~np.isfinite(local).all(axis=1)
        if bad.any():
            raise DivergentRatioError(spec.start + int(np.flatnonzero(bad)[0]))
        out[sl] = from_local(f_rm, local)

    return LandmarkSet(out)


def retarget_sequence(ref_0: LandmarkSet, driving: LandmarkSequence,
                      config: RetargetConfig | None = None) -> LandmarkSequence:
    """Repose the reference with every driving frame's motion from frame 0."""
    config = config or RetargetConfig()
    first = driving.frames[0]
    frames = []
    for index, frame in enumerate(driving.frames):
        try:
            frames.append(retarget_frame(ref_0, first, frame, config))
        except DegenerateEndpointsError as exc:
            raise DegenerateEndpointsError(part=exc.part, frame_index=index) from exc
        except DivergentRatioError as exc:
            raise DivergentRatioError(exc.landmark_index, frame_index=index) from exc
    return LandmarkSequence(tuple(frames), fps=driving.fps)
