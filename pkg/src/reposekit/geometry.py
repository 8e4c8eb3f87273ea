"""Planar coordinate frames built from landmark endpoint pairs.

A frame is an origin plus an axis angle. Angles are radians in (-pi, pi]
and, with y growing downward, increase clockwise on screen. Local
coordinates are obtained by translating the origin away and rotating the
axis onto +x.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateEndpointsError, NonFiniteError

TWO_PI = 2.0 * math.pi

# Endpoint pairs closer than this have no usable direction.
ENDPOINT_EPSILON = 1e-9


def wrap_angle(angle: float) -> float:
    """Wrap an angle in radians to the interval (-pi, pi]."""
    angle = float(angle)
    if -math.pi < angle <= math.pi:
        return angle
    m = angle % TWO_PI  # [0, 2*pi)
    return m if m <= math.pi else m - TWO_PI


@dataclass(frozen=True, eq=False)
class CoordinateFrame:
    """Origin (x, y) in pixels plus axis angle, normalized to (-pi, pi]."""

    origin: np.ndarray
    angle: float

    def __post_init__(self) -> None:
        origin = np.array(self.origin, dtype=np.float64).reshape(2)
        if not np.isfinite(origin).all():
            raise NonFiniteError(tuple(origin), context="frame origin")
        angle = float(self.angle)
        if not math.isfinite(angle):
            raise NonFiniteError(angle, context="frame angle")
        origin.setflags(write=False)
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "angle", wrap_angle(angle))


def frame_from_endpoints(e1, e2) -> CoordinateFrame:
    """Frame with origin at the endpoint midpoint and +x along e1 -> e2."""
    x1, y1 = float(e1[0]), float(e1[1])
    x2, y2 = float(e2[0]), float(e2[1])
    dx = x2 - x1
    dy = y2 - y1
    if math.hypot(dx, dy) <= ENDPOINT_EPSILON:
        raise DegenerateEndpointsError()
    origin = np.array(((x1 + x2) / 2.0, (y1 + y2) / 2.0))
    return CoordinateFrame(origin, math.atan2(dy, dx))


def to_local(frame: CoordinateFrame, points) -> np.ndarray:
    """Map world point(s) into frame-local coordinates.

    Accepts a single (2,) point or an (N, 2) array and returns the same
    shape. Scalar and array paths share the exact arithmetic expression.
    """
    p = np.asarray(points, dtype=np.float64)
    c = math.cos(frame.angle)
    s = math.sin(frame.angle)
    ox = frame.origin[0]
    oy = frame.origin[1]
    if p.ndim == 1:
        dx = p[0] - ox
        dy = p[1] - oy
        return np.array((c * dx + s * dy, c * dy - s * dx))
    dx = p[..., 0] - ox
    dy = p[..., 1] - oy
    return np.stack((c * dx + s * dy, c * dy - s * dx), axis=-1)


def from_local(frame: CoordinateFrame, points) -> np.ndarray:
    """Map frame-local point(s) back into world coordinates."""
    q = np.asarray(points, dtype=np.float64)
    c = math.cos(frame.angle)
    s = math.sin(frame.angle)
    ox = frame.origin[0]
    oy = frame.origin[1]
    if q.ndim == 1:
        qx = q[0]
        qy = q[1]
        return np.array((c * qx - s * qy + ox, s * qx + c * qy + oy))
    qx = q[..., 0]
    qy = q[..., 1]
    return np.stack((c * qx - s * qy + ox, s * qx + c * qy + oy), axis=-1)
