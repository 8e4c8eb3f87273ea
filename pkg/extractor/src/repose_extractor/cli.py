"""Command-line interface.

Subcommands: feature (denoiser activation map as a tensor file) and
embedding (global appearance vector as an embedding file). Exit codes:
0 on success, 1 on validation errors (bad configuration, unreadable
images, unknown flags), 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import sys

from .config import DEFAULT_ADAPTER, DEFAULT_BACKBONE, ExtractorConfig
from .embedding import extract_embedding
from .errors import ExtractorError
from .inversion import extract_feature

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_IO = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: A003 - argparse hook
        raise _UsageError(message)


def cmd_feature(args) -> int:
    config = ExtractorConfig(
        time_step=args.step,
        unet_layer=args.layer,
        text_prompt=args.prompt,
        backbone=args.backbone,
        adapter=args.adapter,
        image_size=args.size,
    )
    feature = extract_feature(args.image, args.out, config,
                              prompt_image_path=args.prompt_image)
    c, h, w = feature.shape
    print(f"feature {c}x{h}x{w} -> {args.out}")
    return EXIT_OK


def cmd_embedding(args) -> int:
    vector = extract_embedding(args.image, args.out)
    print(f"embedding {vector.size} -> {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    defaults = ExtractorConfig()
    parser = _Parser(prog="repose-extract",
                     description="Feature-map and embedding extraction for the "
                                 "reposing toolkit's file formats.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("feature", help="extract a semantic feature map (FSHT)")
    p.add_argument("--image", required=True, help="input image file")
    p.add_argument("--out", required=True, help="output tensor file")
    p.add_argument("--prompt-image",
                   help="cross image for the final conditioning call "
                        "(defaults to the input image)")
    p.add_argument("--step", type=int, default=defaults.time_step,
                   help="schedule step the noising walk stops at")
    p.add_argument("--layer", type=int, default=defaults.unet_layer,
                   help="denoiser layer to tap (1..7)")
    p.add_argument("--size", type=int, default=defaults.image_size,
                   help="square image side in pixels (multiple of 8)")
    p.add_argument("--prompt", default=defaults.text_prompt,
                   help="text prompt for conditioning")
    p.add_argument("--backbone", default=DEFAULT_BACKBONE, help="backbone id")
    p.add_argument("--adapter", default=DEFAULT_ADAPTER, help="image-prompt adapter id")
    p.set_defaults(func=cmd_feature)

    p = sub.add_parser("embedding", help="extract an appearance embedding (FSHE)")
    p.add_argument("--image", required=True, help="input image file")
    p.add_argument("--out", required=True, help="output embedding file")
    p.set_defaults(func=cmd_embedding)

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
    except ExtractorError as exc:
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
