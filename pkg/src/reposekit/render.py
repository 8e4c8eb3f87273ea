"""Deterministic rasterization of landmark frames to portable pixmaps.

Each facial part draws in its own color on a white background: filled
discs per landmark, optionally connected by the standard 68-point part
polylines. Output is binary PPM (P6), one file per frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .model import NUM_LANDMARKS, PART_RANGES, FacialPart, LandmarkSequence, LandmarkSet

MIN_CANVAS = 64

PART_COLORS: dict[FacialPart, tuple[int, int, int]] = {
    FacialPart.EYES: (0, 102, 255),
    FacialPart.MOUTH: (220, 20, 60),
    FacialPart.NOSE: (255, 165, 0),
    FacialPart.EYEBROWS: (34, 139, 34),
    FacialPart.FACE_BOUNDARY: (105, 105, 105),
}

# Polyline chains per part following the standard 68-point topology;
# closed chains connect their last point back to the first.
PART_CHAINS: dict[FacialPart, tuple[tuple[range, bool], ...]] = {
    FacialPart.FACE_BOUNDARY: ((range(0, 17), False),),
    FacialPart.EYEBROWS: ((range(17, 22), False), (range(22, 27), False)),
    FacialPart.NOSE: ((range(27, 31), False), (range(31, 36), False)),
    FacialPart.EYES: ((range(36, 42), True), (range(42, 48), True)),
    FacialPart.MOUTH: ((range(48, 60), True), (range(60, 68), True)),
}

_PART_OF_INDEX: list[FacialPart] = [None] * NUM_LANDMARKS  # type: ignore[list-item]
for _part, (_start, _stop) in PART_RANGES.items():
    for _i in range(_start, _stop):
        _PART_OF_INDEX[_i] = _part


@dataclass(frozen=True)
class RenderStyle:
    """Disc radius, polyline toggle and per-part colors."""

    radius: int = 2
    draw_lines: bool = True
    background: tuple[int, int, int] = (255, 255, 255)
    part_colors: Mapping[FacialPart, tuple[int, int, int]] = field(
        default_factory=lambda: dict(PART_COLORS))

    def __post_init__(self) -> None:
        if self.radius < 0:
            raise ValueError(f"radius must be non-negative, got {self.radius}")
        missing = [p for p in FacialPart if p not in self.part_colors]
        if missing:
            raise ValueError(f"style missing colors for: {[p.value for p in missing]}")


def _round_pixel(value: float) -> int:
    return int(math.floor(value + 0.5))


def _fill_disc(image: np.ndarray, cx: int, cy: int, radius: int,
               color: tuple[int, int, int]) -> None:
    h, w = image.shape[:2]
    y0 = max(cy - radius, 0)
    y1 = min(cy + radius, h - 1)
    x0 = max(cx - radius, 0)
    x1 = min(cx + radius, w - 1)
    if y0 > y1 or x0 > x1:
        return
    ys = np.arange(y0, y1 + 1)[:, None] - cy
    xs = np.arange(x0, x1 + 1)[None, :] - cx
    mask = ys * ys + xs * xs <= radius * radius
    image[y0:y1 + 1, x0:x1 + 1][mask] = color


def _draw_line(image: np.ndarray, x0: int, y0: int, x1: int, y1: int,
               color: tuple[int, int, int]) -> None:
    # Integer Bresenham; endpoints are already inside the canvas.
    dx = abs(x1 - x0)
    dy = -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    while True:
        image[y0, x0] = color
        if x0 == x1 and y0 == y1:
            return
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def render_frame(landmarks: LandmarkSet, canvas: tuple[int, int],
                 style: RenderStyle | None = None) -> tuple[np.ndarray, bool]:
    """Rasterize one frame onto an (H, W, 3) uint8 buffer.

    Returns the buffer plus a flag that is true when any landmark fell
    outside the canvas and was clamped to its border.
    """
    style = style or RenderStyle()
    h, w = int(canvas[0]), int(canvas[1])
    if h < MIN_CANVAS or w < MIN_CANVAS:
        raise ValueError(f"canvas must be at least {MIN_CANVAS}x{MIN_CANVAS}, got {h}x{w}")
    image = np.empty((h, w, 3), dtype=np.uint8)
    image[:] = style.background

    xs = [_round_pixel(p[0]) for p in landmarks.points]
    ys = [_round_pixel(p[1]) for p in landmarks.points]
    clamped = any(not (0 <= x < w and 0 <= y < h) for x, y in zip(xs, ys))
    xs = [min(max(x, 0), w - 1) for x in xs]
    ys = [min(max(y, 0), h - 1) for y in ys]

    if style.draw_lines:
        for part in FacialPart:
            color = style.part_colors[part]
            for chain, closed in PART_CHAINS[part]:
                indices = list(chain)
                pairs = list(zip(indices, indices[1:]))
                if closed:
                    pairs.append((indices[-1], indices[0]))
                for i, j in pairs:
                    _draw_line(image, xs[i], ys[i], xs[j], ys[j], color)
    for i in range(NUM_LANDMARKS):
        _fill_disc(image, xs[i], ys[i], style.radius,
                   style.part_colors[_PART_OF_INDEX[i]])
    return image, clamped


def write_ppm(path, image: np.ndarray) -> None:
    """Write an (H, W, 3) uint8 buffer as binary PPM."""
    arr = np.ascontiguousarray(image, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"image must be (H, W, 3), got shape {arr.shape}")
    h, w = arr.shape[:2]
    header = f"P6\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + arr.tobytes())


def frame_filename(index: int) -> str:
    return f"frame_{index:06d}.ppm"


def render_sequence(sequence: LandmarkSequence, canvas: tuple[int, int],
                    out_dir, style: RenderStyle | None = None) -> bool:
    """Render every frame to out_dir with zero-padded numeric names.

    Returns true when any frame had landmarks clamped to the canvas.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    any_clamped = False
    for index, frame in enumerate(sequence.frames):
        image, clamped = render_frame(frame, canvas, style)
        any_clamped = any_clamped or clamped
        write_ppm(out / frame_filename(index), image)
    return any_clamped
