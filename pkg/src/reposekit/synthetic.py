"""Deterministic synthetic faces and driving motions.

Used by the test suite and the bundled demo fixtures so the toolkit can
be exercised without real annotation data. The template is a stylized
68-point face in a unit box, y growing downward.
"""
from __future__ import annotations

import math

import numpy as np

from .geometry import frame_from_endpoints, from_local, to_local
from .model import FacialPart, LandmarkSet, LandmarkSequence, PartLayout


def face_template() -> np.ndarray:
    """Canonical 68-point face, roughly spanning [-1, 1] x [-0.6, 1]."""
    pts = np.zeros((68, 2))
    # Jaw arc, left ear over the chin to the right ear.
    for k in range(17):
        u = k / 16.0
        pts[k] = (-0.95 * math.cos(math.pi * u), -0.15 + 1.10 * math.sin(math.pi * u))
    # Brows, outer to inner on the left, inner to outer on the right.
    for k in range(5):
        u = k / 4.0
        arch = -0.48 - 0.07 * math.sin(math.pi * u)
        pts[17 + k] = (-0.65 + 0.50 * u, arch)
        pts[22 + k] = (0.15 + 0.50 * u, -0.48 - 0.07 * math.sin(math.pi * (1.0 - u)))
    # Nose bridge straight down the midline, then the nostril row.
    for k in range(4):
        pts[27 + k] = (0.0, -0.40 + k * (0.38 / 3.0))
    pts[31] = (-0.16, 0.12)
    pts[32] = (-0.08, 0.15)
    pts[33] = (0.0, 0.17)
    pts[34] = (0.08, 0.15)
    pts[35] = (0.16, 0.12)
    # Eyes as six-point rings, outer corners at 36 and 45.
    pts[36] = (-0.52, -0.25)
    pts[37] = (-0.46, -0.31)
    pts[38] = (-0.34, -0.31)
    pts[39] = (-0.28, -0.25)
    pts[40] = (-0.34, -0.19)
    pts[41] = (-0.46, -0.19)
    pts[42] = (0.28, -0.25)
    pts[43] = (0.34, -0.31)
    pts[44] = (0.46, -0.31)
    pts[45] = (0.52, -0.25)
    pts[46] = (0.46, -0.19)
    pts[47] = (0.34, -0.19)
    # Mouth: outer ring of 12, inner ring of 8, corners first.
    for k in range(12):
        theta = math.pi + k * (2.0 * math.pi / 12.0)
        pts[48 + k] = (0.30 * math.cos(theta), 0.55 + 0.13 * math.sin(theta))
    for k in range(8):
        theta = math.pi + k * (2.0 * math.pi / 8.0)
        pts[60 + k] = (0.19 * math.cos(theta), 0.55 + 0.06 * math.sin(theta))
    return pts


def synthetic_face(center=(256.0, 256.0), scale: float = 180.0,
                   rng: np.random.Generator | None = None,
                   jitter: float = 0.0) -> LandmarkSet:
    """Template face placed at a center and scale, with optional jitter."""
    pts = face_template() * float(scale) + np.asarray(center, dtype=np.float64)
    if jitter > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        pts = pts + rng.uniform(-jitter, jitter, size=pts.shape)
    return LandmarkSet(pts)


def synthetic_motion(base: LandmarkSet, frames: int = 16,
                     rng: np.random.Generator | None = None, *,
                     translation: float = 18.0, rotation: float = 0.12,
                     part_offset: float = 3.0, part_scale: float = 0.08,
                     part_rotation: float = 0.10,
                     fix_global_origin: bool = False,
                     fps: float = 25.0,
                     layout: PartLayout | None = None) -> LandmarkSequence:
    """Driving sequence: rigid head motion plus periodic part deformations.

    Frame 0 is the base set unchanged. With fix_global_origin the head
    only rotates about its frame origin and the face boundary keeps its
    shape, so the head-frame origin never moves.
    """
    if frames < 1:
        raise ValueError("need at least one frame")
    rng = rng or np.random.default_rng(0)
    layout = layout or PartLayout.ibug68()

    ia, ib = layout.endpoints(FacialPart.FACE_BOUNDARY)
    pivot = frame_from_endpoints(base.points[ia], base.points[ib]).origin

    moving_parts = [p for p in FacialPart
                    if not (fix_global_origin and p is FacialPart.FACE_BOUNDARY)]
    coeff = {
        part: {
            "offset": rng.uniform(-part_offset, part_offset, size=2),
            "scale": rng.uniform(-part_scale, part_scale, size=2),
            "rot": rng.uniform(-part_rotation, part_rotation),
            "phase": rng.uniform(0.0, 2.0 * math.pi, size=3),
        }
        for part in moving_parts
    }
    head = {
        "shift": rng.uniform(-translation, translation, size=2),
        "rot": rng.uniform(-rotation, rotation),
        "phase": rng.uniform(0.0, 2.0 * math.pi, size=2),
    }

    out = [base]
    for j in range(1, frames):
        wave = 2.0 * math.pi * j / frames
        pts = base.points.copy()
        for part in moving_parts:
            spec = layout.spec(part)
            ea, eb = layout.endpoints(part)
            frame = frame_from_endpoints(base.points[ea], base.points[eb])
            q = to_local(frame, base.points[spec.as_slice])
            c = coeff[part]
            sx, sy = 1.0 + c["scale"] * math.sin(wave + c["phase"][0])
            rot = c["rot"] * math.sin(wave + c["phase"][1])
            off = c["offset"] * math.sin(wave + c["phase"][2])
            q = q * (sx, sy)
            cr, sr = math.cos(rot), math.sin(rot)
            q = np.stack((cr * q[:, 0] - sr * q[:, 1],
                          sr * q[:, 0] + cr * q[:, 1]), axis=-1) + off
            pts[spec.as_slice] = from_local(frame, q)
        angle = head["rot"] * math.sin(wave + head["phase"][0])
        ca, sa = math.cos(angle), math.sin(angle)
        d = pts - pivot
        pts = np.stack((ca * d[:, 0] - sa * d[:, 1],
                        sa * d[:, 0] + ca * d[:, 1]), axis=-1) + pivot
        if not fix_global_origin:
            pts = pts + head["shift"] * math.sin(wave + head["phase"][1])
        out.append(LandmarkSet(pts))
    return LandmarkSequence(tuple(out), fps=fps)
