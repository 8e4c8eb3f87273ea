"""Command-line interface.

Subcommands: match, gallery, retarget, eval, render, pipeline. Results go
to output files or stdout; diagnostics go to stderr. Exit codes: 0 on
success, 1 on validation errors (bad counts, malformed files, degenerate
geometry, unknown flags), 2 on I/O errors, 3 when rendering had to clamp
landmarks onto the canvas.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import FormatError, MissingPartError, ReposeError
from .formats import (
    LandmarkFile,
    read_embedding,
    read_landmark_file,
    read_tensor,
    write_landmark_file,
)
from .gallery import assemble_targets, load_gallery_manifest
from .matching import AnnotatedTarget, FeatureMap, as_landmark_set, match_landmarks
from .metrics import nme_report, trajectory_error
from .model import FacialPart, LandmarkSequence, PartLayout
from .render import RenderStyle, render_sequence
from .retarget import RetargetConfig, retarget_sequence

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2
EXIT_CLAMPED = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise _UsageError(message)


def _load_annotated_target(features_path, landmarks_path) -> AnnotatedTarget:
    doc = read_landmark_file(landmarks_path)
    data = read_tensor(features_path)
    fmap = FeatureMap(data, image_size=doc.image_size)
    return AnnotatedTarget(fmap, doc.sequence.frames[0])


def _load_targets_file(path) -> dict[FacialPart | None, list[AnnotatedTarget]]:
    """Read a targets manifest: either a flat entry list or per-part lists.

    A flat list maps from the None key; per-part manifests (including
    selection files written by the gallery command) map each part.
    """
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FormatError(f"targets manifest is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError("targets manifest must be a JSON object")
    base = path.parent

    def resolve(ref: str) -> Path:
        p = Path(ref)
        return p if p.is_absolute() else base / p

    def load_entries(entries) -> list[AnnotatedTarget]:
        if not isinstance(entries, list) or not entries:
            raise FormatError("targets manifest needs a non-empty entry list")
        out = []
        for entry in entries:
            try:
                out.append(_load_annotated_target(resolve(entry["features"]),
                                                  resolve(entry["landmarks"])))
            except (TypeError, KeyError) as exc:
                raise FormatError("malformed target entry") from exc
        return out

    if "entries" in payload:
        return {None: load_entries(payload["entries"])}
    parts = payload.get("parts")
    if not isinstance(parts, dict):
        raise FormatError("targets manifest needs 'entries' or 'parts'")
    by_value = {part.value: part for part in FacialPart}
    result: dict[FacialPart | None, list[AnnotatedTarget]] = {}
    for key, value in parts.items():
        if key not in by_value:
            raise FormatError(f"unknown facial part {key!r}")
        entries = value.get("entries") if isinstance(value, dict) else value
        result[by_value[key]] = load_entries(entries)
    return result


def _match_with_targets(ref_map: FeatureMap,
                        targets: dict[FacialPart | None, list[AnnotatedTarget]]):
    if None in targets:
        return as_landmark_set(match_landmarks(ref_map, targets[None]))
    layout = PartLayout.ibug68()
    matches: dict[int, np.ndarray] = {}
    for part in FacialPart:
        if part not in targets:
            raise MissingPartError(part)
        spec = layout.spec(part)
        matches.update(match_landmarks(ref_map, targets[part], spec.indices))
    return as_landmark_set(matches)


def _ref_feature_map(path, image_size) -> FeatureMap:
    data = read_tensor(path)
    size = tuple(image_size) if image_size else None
    return FeatureMap(data, image_size=size)


def cmd_match(args) -> int:
    ref_map = _ref_feature_map(args.ref_feat, args.image_size)
    targets = _load_targets_file(args.targets)
    matched = _match_with_targets(ref_map, targets)
    write_landmark_file(args.out, LandmarkFile(LandmarkSequence((matched,)),
                                               ref_map.image_size))
    return EXIT_OK


def _read_part_embeddings(directory) -> dict[FacialPart, np.ndarray]:
    directory = Path(directory)
    return {part: read_embedding(directory / f"{part.value}.fshe")
            for part in FacialPart}


def _selection_payload(selection, out_path: Path) -> dict:
    def relativize(ref: str) -> str:
        try:
            return Path(os.path.relpath(ref, out_path.parent)).as_posix()
        except ValueError:  # different drive on Windows
            return str(Path(ref))

    return {
        "version": 1,
        "parts": {
            part.value: {
                "domain": domain.name,
                "entries": [
                    {"features": relativize(t.features),
                     "landmarks": relativize(t.landmarks)}
                    for t in domain.targets
                ],
            }
            for part, domain in selection.items()
        },
    }


def cmd_gallery(args) -> int:
    gallery = load_gallery_manifest(args.gallery)
    ref_embeddings = _read_part_embeddings(args.ref_embeds)
    selection = assemble_targets(ref_embeddings, gallery)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(_selection_payload(selection, out), sort_keys=True,
                              separators=(",", ":")) + "\n")
    return EXIT_OK


def _retarget_config(args) -> RetargetConfig:
    return RetargetConfig(ratio_epsilon=args.eps,
                          scale_global_translation=args.scale_global)


def cmd_retarget(args) -> int:
    ref_doc = read_landmark_file(args.ref)
    driving_doc = read_landmark_file(args.driving)
    result = retarget_sequence(ref_doc.sequence.frames[0], driving_doc.sequence,
                               _retarget_config(args))
    write_landmark_file(args.out, LandmarkFile(result, ref_doc.image_size))
    return EXIT_OK


def cmd_eval(args) -> int:
    if args.metric == "nme":
        pred = read_landmark_file(args.pred)
        gt = read_landmark_file(args.gt)
        report = nme_report(pred.sequence, gt.sequence)
        for index, value in enumerate(report.per_frame):
            print(f"nme {index:06d} {value:.3f}")
        print(f"nme mean {report.mean:.3f}")
        payload = {"metric": "nme", "per_frame": list(report.per_frame),
                   "mean": report.mean}
    else:
        pred = read_landmark_file(args.pred)
        ref = read_landmark_file(args.ref)
        value = trajectory_error(pred.sequence, ref.sequence)
        print(f"traj mean {value:.3f}")
        payload = {"metric": "traj", "mean": value}
    if args.out:
        Path(args.out).write_text(json.dumps(payload, sort_keys=True,
                                             separators=(",", ":")) + "\n")
    return EXIT_OK


def _render_style(args) -> RenderStyle:
    return RenderStyle(radius=args.radius, draw_lines=not args.no_lines)


def cmd_render(args) -> int:
    doc = read_landmark_file(args.landmarks)
    canvas = tuple(args.canvas) if args.canvas else doc.image_size
    clamped = render_sequence(doc.sequence, canvas, args.out_dir, _render_style(args))
    if clamped:
        print("warning: landmarks outside the canvas were clamped", file=sys.stderr)
        return EXIT_CLAMPED
    return EXIT_OK


def cmd_pipeline(args) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gallery = load_gallery_manifest(args.gallery)
    ref_embeddings = _read_part_embeddings(args.ref_embeds)
    selection = assemble_targets(ref_embeddings, gallery)
    selection_path = out_dir / "selection.json"
    selection_path.write_text(json.dumps(_selection_payload(selection, selection_path),
                                         sort_keys=True, separators=(",", ":")) + "\n")

    ref_map = _ref_feature_map(args.ref_feat, args.image_size)
    targets = {part: [_load_annotated_target(t.features, t.landmarks)
                      for t in domain.targets]
               for part, domain in selection.items()}
    matched = _match_with_targets(ref_map, targets)
    write_landmark_file(out_dir / "matched.json",
                        LandmarkFile(LandmarkSequence((matched,)), ref_map.image_size))

    driving_doc = read_landmark_file(args.driving)
    result = retarget_sequence(matched, driving_doc.sequence, _retarget_config(args))
    write_landmark_file(out_dir / "retargeted.json",
                        LandmarkFile(result, ref_map.image_size))

    canvas = tuple(args.canvas) if args.canvas else ref_map.image_size
    clamped = render_sequence(result, canvas, out_dir / "frames", _render_style(args))
    if clamped:
        print("warning: landmarks outside the canvas were clamped", file=sys.stderr)
        return EXIT_CLAMPED
    return EXIT_OK


def _add_retarget_flags(parser) -> None:
    parser.add_argument("--scale-global", action="store_true",
                        help="scale the head translation by the face size ratio")
    parser.add_argument("--eps", type=float, default=RetargetConfig().ratio_epsilon,
                        help="per-axis ratio fallback threshold in pixels")


def _add_render_flags(parser) -> None:
    parser.add_argument("--canvas", type=int, nargs=2, metavar=("H", "W"),
                        help="canvas size in pixels")
    parser.add_argument("--radius", type=int, default=2, help="disc radius in pixels")
    parser.add_argument("--no-lines", action="store_true",
                        help="draw discs only, no part polylines")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="reposekit",
                     description="Landmark matching, retargeting, evaluation "
                                 "and rendering for 68-point faces.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("match", help="transfer target landmarks onto a reference "
                                     "feature map")
    p.add_argument("--ref-feat", required=True, help="reference feature map (FSHT)")
    p.add_argument("--targets", required=True, help="targets manifest (JSON)")
    p.add_argument("--out", required=True, help="output landmark file")
    p.add_argument("--image-size", type=int, nargs=2, metavar=("H", "W"),
                   help="reference image size; defaults to the map grid")
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("gallery", help="select the closest appearance domain per part")
    p.add_argument("--ref-embeds", required=True,
                   help="directory with <part>.fshe reference embeddings")
    p.add_argument("--gallery", required=True, help="gallery manifest (JSON)")
    p.add_argument("--out", required=True, help="output selection file")
    p.set_defaults(func=cmd_gallery)

    p = sub.add_parser("retarget", help="repose a reference with a driving sequence")
    p.add_argument("--ref", required=True, help="reference landmark file (frame 0 used)")
    p.add_argument("--driving", required=True, help="driving landmark sequence file")
    p.add_argument("--out", required=True, help="output landmark file")
    _add_retarget_flags(p)
    p.set_defaults(func=cmd_retarget)

    p = sub.add_parser("eval", help="score predictions against a reference")
    ev = p.add_subparsers(dest="metric", required=True)
    nme_p = ev.add_parser("nme", help="normalized mean error per frame")
    nme_p.add_argument("--pred", required=True)
    nme_p.add_argument("--gt", required=True)
    nme_p.add_argument("--out", help="optional JSON report path")
    nme_p.set_defaults(func=cmd_eval, metric="nme")
    traj_p = ev.add_parser("traj", help="mean trajectory error in pixels")
    traj_p.add_argument("--pred", required=True)
    traj_p.add_argument("--ref", required=True)
    traj_p.add_argument("--out", help="optional JSON report path")
    traj_p.set_defaults(func=cmd_eval, metric="traj")

    p = sub.add_parser("render", help="rasterize landmark frames to PPM images")
    p.add_argument("--landmarks", required=True, help="landmark file to draw")
    p.add_argument("--out-dir", required=True, help="output directory for frames")
    _add_render_flags(p)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("pipeline", help="gallery selection, matching, retargeting "
                                        "and rendering in one pass")
    p.add_argument("--ref-feat", required=True, help="reference feature map (FSHT)")
    p.add_argument("--ref-embeds", required=True,
                   help="directory with <part>.fshe reference embeddings")
    p.add_argument("--gallery", required=True, help="gallery manifest (JSON)")
    p.add_argument("--driving", required=True, help="driving landmark sequence file")
    p.add_argument("--out-dir", required=True, help="output directory")
    p.add_argument("--image-size", type=int, nargs=2, metavar=("H", "W"),
                   help="reference image size; defaults to the map grid")
    _add_retarget_flags(p)
    _add_render_flags(p)
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_VALIDATION
    except SystemExit as exc:  # --help exits through argparse
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ReposeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
