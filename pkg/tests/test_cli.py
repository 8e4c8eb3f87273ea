"""Command-line interface: subcommands, exit codes, outputs."""
from __future__ import annotations

import json

import numpy as np
import pytest

from reposekit import FacialPart, LandmarkSequence, LandmarkSet
from reposekit.cli import main
from reposekit.formats import (
    LandmarkFile,
    read_landmark_file,
    write_embedding,
    write_landmark_file,
    write_tensor,
)
from reposekit.synthetic import synthetic_face, synthetic_motion


def _write_sequence(path, sequence, image_size=(512, 512)):
    write_landmark_file(path, LandmarkFile(sequence, image_size))


def _driving(tmp_path, frames=4, **kwargs):
    rng = np.random.default_rng(70)
    base = synthetic_face(rng=rng, jitter=1.0)
    seq = synthetic_motion(base, frames=frames, rng=rng, **kwargs)
    path = tmp_path / "driving.json"
    _write_sequence(path, seq)
    return path, seq


def _matching_fixture(tmp_path, interior=False):
    """Feature map with 68 planted cells; one target annotated on them."""
    rng = np.random.default_rng(77)
    data = rng.normal(size=(2, 64, 64)).astype(np.float32)
    if interior:
        cells = rng.choice(32 * 32, size=68, replace=False)
        pts = np.stack((16 + cells % 32, 16 + cells // 32), axis=-1)
    else:
        cells = rng.choice(64 * 64, size=68, replace=False)
        pts = np.stack((cells % 64, cells // 64), axis=-1)
    pts = pts.astype(np.float64)
    write_tensor(tmp_path / "ref.fsht", data)
    write_tensor(tmp_path / "target.fsht", data)
    _write_sequence(tmp_path / "target.json",
                    LandmarkSequence((LandmarkSet(pts),)), (64, 64))
    (tmp_path / "targets.json").write_text(json.dumps({
        "entries": [{"features": "target.fsht", "landmarks": "target.json"}],
    }))
    return pts


def _gallery_fixture(tmp_path):
    """Two domains per part; reference embeddings sit on styleA's means."""
    rng = np.random.default_rng(78)
    payload = {"version": 1, "k": 2, "parts": {}}
    embeds_dir = tmp_path / "ref_embeds"
    embeds_dir.mkdir()
    for part in FacialPart:
        domains = []
        for style in ("styleA", "styleB"):
            entries = []
            vectors = rng.normal(size=(2, 4))
            for i in range(2):
                stem = f"{part.value}_{style}_{i}"
                write_embedding(tmp_path / f"{stem}.fshe", vectors[i])
                entries.append({"embedding": f"{stem}.fshe",
                                "features": "target.fsht",
                                "landmarks": "target.json"})
            domains.append({"name": style, "entries": entries})
            if style == "styleA":
                mean = vectors.astype(np.float32).astype(np.float64).mean(axis=0)
                write_embedding(embeds_dir / f"{part.value}.fshe", mean)
        payload["parts"][part.value] = domains
    (tmp_path / "gallery.json").write_text(json.dumps(payload))
    return embeds_dir


# --- parsing and exit codes --------------------------------------------------

def test_no_command_is_validation_error(capsys):
    assert main([]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_flag_is_validation_error(capsys):
    assert main(["retarget", "--bogus", "x"]) == 1


def test_missing_required_flag(capsys):
    assert main(["retarget", "--ref", "a.json"]) == 1


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "reposekit" in capsys.readouterr().out


def test_missing_input_file_is_io_error(tmp_path, capsys):
    out = tmp_path / "out.json"
    code = main(["retarget", "--ref", str(tmp_path / "nope.json"),
                 "--driving", str(tmp_path / "nope2.json"), "--out", str(out)])
    assert code == 2


def test_malformed_input_is_validation_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    code = main(["retarget", "--ref", str(bad), "--driving", str(bad),
                 "--out", str(tmp_path / "out.json")])
    assert code == 1


# --- retarget ----------------------------------------------------------------

def test_retarget_self_reproduces_driving(tmp_path):
    driving_path, seq = _driving(tmp_path)
    ref_path = tmp_path / "ref.json"
    _write_sequence(ref_path, LandmarkSequence((seq.frames[0],)))
    out = tmp_path / "out.json"
    assert main(["retarget", "--ref", str(ref_path), "--driving",
                 str(driving_path), "--out", str(out)]) == 0
    got = read_landmark_file(out)
    assert np.abs(got.sequence.as_array() - seq.as_array()).max() <= 1e-6
    assert got.image_size == (512, 512)


def test_retarget_deterministic_bytes(tmp_path):
    driving_path, seq = _driving(tmp_path)
    ref_path = tmp_path / "ref.json"
    _write_sequence(ref_path, LandmarkSequence((synthetic_face(center=(200.0, 200.0),
                                                               scale=120.0),)))
    out1 = tmp_path / "out1.json"
    out2 = tmp_path / "out2.json"
    for out in (out1, out2):
        assert main(["retarget", "--ref", str(ref_path), "--driving",
                     str(driving_path), "--out", str(out)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_retarget_degenerate_driving_fails_validation(tmp_path, capsys):
    base = synthetic_face()
    collapsed = base.points.copy()
    collapsed[48:68] = collapsed[48]
    seq = LandmarkSequence((base, LandmarkSet(collapsed)))
    driving_path = tmp_path / "driving.json"
    _write_sequence(driving_path, seq)
    ref_path = tmp_path / "ref.json"
    _write_sequence(ref_path, LandmarkSequence((base,)))
    code = main(["retarget", "--ref", str(ref_path), "--driving",
                 str(driving_path), "--out", str(tmp_path / "out.json")])
    assert code == 1
    assert "mouth" in capsys.readouterr().err


# --- match -------------------------------------------------------------------

def test_match_flat_manifest_identity(tmp_path):
    pts = _matching_fixture(tmp_path)
    out = tmp_path / "matched.json"
    assert main(["match", "--ref-feat", str(tmp_path / "ref.fsht"),
                 "--targets", str(tmp_path / "targets.json"),
                 "--out", str(out)]) == 0
    got = read_landmark_file(out)
    assert got.image_size == (64, 64)
    assert np.array_equal(got.sequence.frames[0].points, pts)


def test_match_per_part_manifest(tmp_path):
    pts = _matching_fixture(tmp_path)
    parts_manifest = {
        "parts": {part.value: {"entries": [{"features": "target.fsht",
                                            "landmarks": "target.json"}]}
                  for part in FacialPart}
    }
    (tmp_path / "parts.json").write_text(json.dumps(parts_manifest))
    out = tmp_path / "matched.json"
    assert main(["match", "--ref-feat", str(tmp_path / "ref.fsht"),
                 "--targets", str(tmp_path / "parts.json"),
                 "--out", str(out)]) == 0
    got = read_landmark_file(out)
    assert np.array_equal(got.sequence.frames[0].points, pts)


def test_match_per_part_manifest_missing_part(tmp_path, capsys):
    _matching_fixture(tmp_path)
    manifest = {"parts": {"eyes": [{"features": "target.fsht",
                                    "landmarks": "target.json"}]}}
    (tmp_path / "parts.json").write_text(json.dumps(manifest))
    code = main(["match", "--ref-feat", str(tmp_path / "ref.fsht"),
                 "--targets", str(tmp_path / "parts.json"),
                 "--out", str(tmp_path / "matched.json")])
    assert code == 1


# --- gallery -----------------------------------------------------------------

def test_gallery_selects_closest_domain(tmp_path):
    _matching_fixture(tmp_path)
    embeds_dir = _gallery_fixture(tmp_path)
    out = tmp_path / "selection.json"
    assert main(["gallery", "--ref-embeds", str(embeds_dir),
                 "--gallery", str(tmp_path / "gallery.json"),
                 "--out", str(out)]) == 0
    payload = json.loads(out.read_text())
    assert payload["version"] == 1
    for part in FacialPart:
        chosen = payload["parts"][part.value]
        assert chosen["domain"] == "styleA"
        assert chosen["entries"][0]["features"] == "target.fsht"
    assert out.read_text().endswith("\n")


# --- eval --------------------------------------------------------------------

def test_eval_nme_zero_and_report(tmp_path, capsys):
    driving_path, seq = _driving(tmp_path, frames=3)
    out = tmp_path / "report.json"
    assert main(["eval", "nme", "--pred", str(driving_path),
                 "--gt", str(driving_path), "--out", str(out)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "nme 000000 0.000"
    assert lines[1] == "nme 000001 0.000"
    assert lines[2] == "nme 000002 0.000"
    assert lines[3] == "nme mean 0.000"
    payload = json.loads(out.read_text())
    assert payload["metric"] == "nme"
    assert payload["mean"] == 0.0
    assert payload["per_frame"] == [0.0, 0.0, 0.0]


def test_eval_nme_length_mismatch(tmp_path, capsys):
    driving_path, seq = _driving(tmp_path, frames=3)
    short = tmp_path / "short.json"
    _write_sequence(short, LandmarkSequence(seq.frames[:2]))
    assert main(["eval", "nme", "--pred", str(short),
                 "--gt", str(driving_path)]) == 1


def test_eval_traj_known_offset(tmp_path, capsys):
    base = synthetic_face()
    ref = LandmarkSequence((base, base))
    moved = LandmarkSet(base.points + (3.0, 4.0))
    pred = LandmarkSequence((moved, moved))
    ref_path = tmp_path / "ref.json"
    pred_path = tmp_path / "pred.json"
    _write_sequence(ref_path, ref)
    _write_sequence(pred_path, pred)
    assert main(["eval", "traj", "--pred", str(pred_path),
                 "--ref", str(ref_path)]) == 0
    assert capsys.readouterr().out.strip() == "traj mean 5.000"


# --- render ------------------------------------------------------------------

def test_render_writes_frames(tmp_path):
    path = tmp_path / "seq.json"
    face = synthetic_face(center=(128.0, 128.0), scale=70.0)
    _write_sequence(path, LandmarkSequence((face, face)), (256, 256))
    out_dir = tmp_path / "frames"
    assert main(["render", "--landmarks", str(path),
                 "--out-dir", str(out_dir)]) == 0
    names = sorted(p.name for p in out_dir.iterdir())
    assert names == ["frame_000000.ppm", "frame_000001.ppm"]
    blob = (out_dir / "frame_000000.ppm").read_bytes()
    assert blob.startswith(b"P6\n256 256\n255\n")


def test_render_clamped_exit_code(tmp_path, capsys):
    path = tmp_path / "seq.json"
    face = synthetic_face(center=(128.0, 128.0), scale=70.0)
    _write_sequence(path, LandmarkSequence((face,)), (256, 256))
    out_dir = tmp_path / "frames"
    code = main(["render", "--landmarks", str(path), "--out-dir", str(out_dir),
                 "--canvas", "64", "64"])
    assert code == 3
    assert "clamped" in capsys.readouterr().err
    assert (out_dir / "frame_000000.ppm").exists()  # output still written


def test_render_small_canvas_rejected(tmp_path):
    path = tmp_path / "seq.json"
    _write_sequence(path, LandmarkSequence((synthetic_face(),)), (512, 512))
    assert main(["render", "--landmarks", str(path),
                 "--out-dir", str(tmp_path / "frames"),
                 "--canvas", "32", "32"]) == 1


# --- pipeline ----------------------------------------------------------------

def test_pipeline_end_to_end(tmp_path):
    pts = _matching_fixture(tmp_path, interior=True)
    embeds_dir = _gallery_fixture(tmp_path)
    driving_path, _ = _driving(tmp_path, frames=3, translation=2.0,
                               rotation=0.05, part_offset=1.0,
                               part_scale=0.03, part_rotation=0.05)
    out_dir = tmp_path / "out"
    args = ["pipeline",
            "--ref-feat", str(tmp_path / "ref.fsht"),
            "--ref-embeds", str(embeds_dir),
            "--gallery", str(tmp_path / "gallery.json"),
            "--driving", str(driving_path),
            "--out-dir", str(out_dir)]
    assert main(args) == 0

    selection = json.loads((out_dir / "selection.json").read_text())
    assert all(selection["parts"][p.value]["domain"] == "styleA"
               for p in FacialPart)

    matched = read_landmark_file(out_dir / "matched.json")
    assert np.array_equal(matched.sequence.frames[0].points, pts)

    retargeted = read_landmark_file(out_dir / "retargeted.json")
    assert len(retargeted.sequence) == 3
    assert np.abs(retargeted.sequence.frames[0].points - pts).max() <= 1e-9

    names = sorted(p.name for p in (out_dir / "frames").iterdir())
    assert names == [f"frame_{i:06d}.ppm" for i in range(3)]

    # A second run produces byte-identical artifacts.
    out_dir2 = tmp_path / "out2"
    args2 = args[:-1] + [str(out_dir2)]
    assert main(args2) == 0
    for name in ("selection.json", "matched.json", "retargeted.json"):
        assert (out_dir / name).read_bytes() == (out_dir2 / name).read_bytes()
    assert ((out_dir / "frames" / "frame_000002.ppm").read_bytes()
            == (out_dir2 / "frames" / "frame_000002.ppm").read_bytes())
