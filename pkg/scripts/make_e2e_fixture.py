#!/usr/bin/env python3
"""Regenerate the end-to-end pipeline fixture under tests/fixtures/e2e/.

Builds a synthetic 80x80 character: a reference feature map with one
distinct unit descriptor planted per landmark, six annotated target maps
sharing those descriptors at their own landmark cells, a two-domain
gallery per facial part (reference embeddings sit on the styleA means),
and a 16-frame driving sequence. Then runs the pipeline CLI and stores
its outputs as goldens.

Floating-point transcendentals can differ across libm builds, so goldens
are anchored to the platform they were generated on. Rerun this script to
refresh them after any intentional behavior change.
"""
from __future__ import annotations

import json
import shutil
import sys
from pathlib import Path

import numpy as np

from reposekit import FacialPart, LandmarkSequence, LandmarkSet
from reposekit.cli import main as cli_main
from reposekit.formats import (
    LandmarkFile,
    read_landmark_file,
    write_embedding,
    write_landmark_file,
    write_tensor,
)
from reposekit.synthetic import synthetic_face, synthetic_motion

CANVAS = 80
CHANNELS = 8
EMBED_DIM = 16
K = 3
FRAMES = 16
MAX_BACKGROUND_COS = 0.6


def snapped_distinct_cells(points: np.ndarray, taken: set[tuple[int, int]],
                           lo: int = 1, hi: int = CANVAS - 2) -> np.ndarray:
    """Round landmarks to integer cells, nudging collisions to free cells."""
    out = np.zeros_like(points)
    for i, (x, y) in enumerate(points):
        cx = int(np.floor(x + 0.5))
        cy = int(np.floor(y + 0.5))
        # Deterministic outward search for a free cell.
        found = None
        for radius in range(0, 8):
            for dy in range(-radius, radius + 1):
                for dx in range(-radius, radius + 1):
                    if max(abs(dx), abs(dy)) != radius:
                        continue
                    cand = (min(max(cx + dx, lo), hi), min(max(cy + dy, lo), hi))
                    if cand not in taken:
                        found = cand
                        break
                if found:
                    break
            if found:
                break
        if found is None:
            raise RuntimeError("no free cell near landmark")
        taken.add(found)
        out[i] = found
    return out


def unit_descriptors(rng: np.random.Generator, count: int) -> np.ndarray:
    """Unit vectors with pairwise cosine below 0.9."""
    rows: list[np.ndarray] = []
    while len(rows) < count:
        v = rng.normal(size=CHANNELS)
        v /= np.linalg.norm(v)
        if all(abs(float(v @ u)) < 0.9 for u in rows):
            rows.append(v)
    return np.stack(rows)


def background_map(rng: np.random.Generator, descriptors: np.ndarray) -> np.ndarray:
    """Random background whose cells all stay below cos 0.6 to every descriptor."""
    data = rng.normal(size=(CHANNELS, CANVAS, CANVAS))
    while True:
        flat = data.reshape(CHANNELS, -1)
        norms = np.linalg.norm(flat, axis=0)
        cos = (descriptors @ flat) / np.maximum(norms, 1e-12)
        bad = np.flatnonzero(cos.max(axis=0) >= MAX_BACKGROUND_COS)
        if bad.size == 0:
            return data
        flat[:, bad] = rng.normal(size=(CHANNELS, bad.size))


def plant(data: np.ndarray, cells: np.ndarray, descriptors: np.ndarray) -> None:
    for (x, y), vec in zip(cells.astype(int), descriptors):
        data[:, y, x] = vec


def build(root: Path) -> None:
    rng = np.random.default_rng(2024)
    input_dir = root / "input"
    golden_dir = root / "golden"
    for directory in (input_dir, golden_dir):
        if directory.exists():
            shutil.rmtree(directory)
        directory.mkdir(parents=True)

    descriptors = unit_descriptors(rng, 68)

    # Reference: landmarks the pipeline is expected to recover.
    ref_face = synthetic_face(center=(40.0, 38.0), scale=21.0)
    ref_cells = snapped_distinct_cells(ref_face.points, set())
    ref_data = background_map(rng, descriptors)
    plant(ref_data, ref_cells, descriptors)
    write_tensor(input_dir / "ref.fsht", ref_data.astype(np.float32))
    write_landmark_file(input_dir / "ref_landmarks.json",
                        LandmarkFile(LandmarkSequence((LandmarkSet(ref_cells),)),
                                     (CANVAS, CANVAS)))

    # Targets: same descriptors planted at a different character's cells.
    target_face = synthetic_face(center=(40.0, 42.0), scale=20.0)
    target_cells = snapped_distinct_cells(target_face.points, set())
    for t in range(6):
        data = background_map(rng, descriptors)
        plant(data, target_cells, descriptors)
        write_tensor(input_dir / f"target_{t}.fsht", data.astype(np.float32))
        write_landmark_file(input_dir / f"target_{t}.json",
                            LandmarkFile(LandmarkSequence((LandmarkSet(target_cells),)),
                                         (CANVAS, CANVAS)))

    # Gallery: styleA references targets 0-2, styleB targets 3-5. The
    # reference embeddings are the styleA means, so styleA must win.
    embeds_dir = input_dir / "ref_embeds"
    embeds_dir.mkdir()
    manifest = {"version": 1, "k": K, "parts": {}}
    for part in FacialPart:
        domains = []
        for style, base_index in (("styleA", 0), ("styleB", 3)):
            entries = []
            vectors = rng.normal(size=(K, EMBED_DIM))
            for i in range(K):
                stem = f"emb_{part.value}_{style}_{i}"
                write_embedding(input_dir / f"{stem}.fshe", vectors[i])
                entries.append({"embedding": f"{stem}.fshe",
                                "features": f"target_{base_index + i}.fsht",
                                "landmarks": f"target_{base_index + i}.json"})
            domains.append({"name": style, "entries": entries})
            if style == "styleA":
                mean = vectors.astype(np.float32).astype(np.float64).mean(axis=0)
                write_embedding(embeds_dir / f"{part.value}.fshe", mean)
        manifest["parts"][part.value] = domains
    (input_dir / "gallery.json").write_text(
        json.dumps(manifest, sort_keys=True, separators=(",", ":")) + "\n")

    # Driving motion: 16 frames of mild rigid + part movement.
    driving_base = synthetic_face(center=(40.0, 40.0), scale=16.0)
    driving = synthetic_motion(driving_base, frames=FRAMES, rng=rng,
                               translation=2.0, rotation=0.06, part_offset=0.8,
                               part_scale=0.04, part_rotation=0.06)
    write_landmark_file(input_dir / "driving.json",
                        LandmarkFile(driving, (CANVAS, CANVAS)))

    code = cli_main(["pipeline",
                     "--ref-feat", str(input_dir / "ref.fsht"),
                     "--ref-embeds", str(embeds_dir),
                     "--gallery", str(input_dir / "gallery.json"),
                     "--driving", str(input_dir / "driving.json"),
                     "--out-dir", str(golden_dir)])
    if code != 0:
        raise RuntimeError(f"pipeline exited with {code}")

    # Sanity: matching recovered the planted reference landmarks, the
    # selection picked styleA everywhere, and nothing left the canvas.
    matched = read_landmark_file(golden_dir / "matched.json")
    if not np.array_equal(matched.sequence.frames[0].points, ref_cells):
        raise RuntimeError("matched landmarks do not equal the planted cells")
    selection = json.loads((golden_dir / "selection.json").read_text())
    for part in FacialPart:
        if selection["parts"][part.value]["domain"] != "styleA":
            raise RuntimeError(f"selection missed styleA for {part.value}")
    retargeted = read_landmark_file(golden_dir / "retargeted.json")
    coords = retargeted.sequence.as_array()
    if coords.min() < 0.0 or coords.max() > CANVAS - 1:
        raise RuntimeError("retargeted landmarks left the canvas")
    frames = sorted(p.name for p in (golden_dir / "frames").iterdir())
    if len(frames) != FRAMES:
        raise RuntimeError(f"expected {FRAMES} frames, found {len(frames)}")
    print(f"fixture written under {root}")


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "tests" / "fixtures" / "e2e")
    build(root)
