"""Serialized interchange formats.

Three formats cross the toolkit boundary:

- landmark files: JSON documents holding a landmark sequence plus the
  pixel size of the image the coordinates live on;
- tensor files: binary feature maps, magic "FSHT", little-endian header
  (version, C, H, W as u32) and a float32 payload laid out channel-major,
  then row-major;
- embedding files: binary vectors, magic "FSHE", little-endian header
  (version, d as u32) and a float32 payload.

Readers reject malformed input with positioned errors; writers accept
only validated, finite values, so write followed by read is the identity.
"""
from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    FormatError,
    NonFiniteError,
    TrailingDataError,
    TruncatedPayloadError,
    VersionUnsupportedError,
    WrongCountError,
)
from .model import LandmarkSequence, LandmarkSet

MAGIC_TENSOR = b"FSHT"
MAGIC_EMBEDDING = b"FSHE"
FORMAT_VERSION = 1
LAYOUT_NAME = "ibug68"

_TENSOR_HEADER = struct.Struct("<4sIIII")
_EMBEDDING_HEADER = struct.Struct("<4sII")


# --- binary tensor / embedding files ---------------------------------------

def _split_header(blob: bytes, header: struct.Struct, magic: bytes):
    if len(blob) >= 4 and blob[:4] != magic:
        raise BadMagicError(blob[:4], magic)
    if len(blob) < header.size:
        raise TruncatedPayloadError(len(blob), expected=header.size)
    return header.unpack_from(blob)


def _check_payload(blob: bytes, offset: int, count: int):
    expected = offset + 4 * count
    if len(blob) < expected:
        raise TruncatedPayloadError(len(blob), expected=expected)
    if len(blob) > expected:
        raise TrailingDataError(expected)
    values = np.frombuffer(blob, dtype="<f4", count=count, offset=offset)
    finite = np.isfinite(values)
    if not finite.all():
        index = int(np.flatnonzero(~finite)[0])
        raise NonFiniteError(offset + 4 * index, context="payload value (byte offset)")
    return values


def encode_tensor(data) -> bytes:
    """Serialize a (C, H, W) array of finite values to tensor file bytes."""
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 3:
        raise ValueError(f"tensor payload must be (C, H, W), got shape {arr.shape}")
    if min(arr.shape) < 1:
        raise ValueError(f"tensor dimensions must be positive, got {arr.shape}")
    bad = ~np.isfinite(arr)
    if bad.any():
        raise NonFiniteError(int(np.flatnonzero(bad)[0]), context="tensor value")
    c, h, w = arr.shape
    return _TENSOR_HEADER.pack(MAGIC_TENSOR, FORMAT_VERSION, c, h, w) + arr.tobytes()


def decode_tensor(blob: bytes) -> np.ndarray:
    """Parse tensor file bytes into a float32 (C, H, W) array."""
    _, version, c, h, w = _split_header(blob, _TENSOR_HEADER, MAGIC_TENSOR)
    if version != FORMAT_VERSION:
        raise VersionUnsupportedError(version)
    if min(c, h, w) < 1:
        raise FormatError(f"tensor header declares a zero dimension: ({c}, {h}, {w})")
    values = _check_payload(blob, _TENSOR_HEADER.size, c * h * w)
    return values.reshape(c, h, w)


def write_tensor(path, data) -> None:
    Path(path).write_bytes(encode_tensor(data))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(Path(path).read_bytes())


def encode_embedding(values) -> bytes:
    """Serialize a 1-D array of finite values to embedding file bytes."""
    arr = np.ascontiguousarray(values, dtype="<f4").reshape(-1)
    if arr.size < 1:
        raise ValueError("embedding must be non-empty")
    bad = ~np.isfinite(arr)
    if bad.any():
        raise NonFiniteError(int(np.flatnonzero(bad)[0]), context="embedding value")
    return _EMBEDDING_HEADER.pack(MAGIC_EMBEDDING, FORMAT_VERSION, arr.size) + arr.tobytes()


def decode_embedding(blob: bytes) -> np.ndarray:
    """Parse embedding file bytes into a float32 (d,) array."""
    _, version, dim = _split_header(blob, _EMBEDDING_HEADER, MAGIC_EMBEDDING)
    if version != FORMAT_VERSION:
        raise VersionUnsupportedError(version)
    if dim < 1:
        raise FormatError("embedding header declares zero dimension")
    return _check_payload(blob, _EMBEDDING_HEADER.size, dim)


def write_embedding(path, values) -> None:
    Path(path).write_bytes(encode_embedding(values))


def read_embedding(path) -> np.ndarray:
    return decode_embedding(Path(path).read_bytes())


# --- landmark files ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class LandmarkFile:
    """A landmark sequence plus the (H, W) pixel size of its image."""

    sequence: LandmarkSequence
    image_size: tuple[int, int]
    layout: str = LAYOUT_NAME

    def __post_init__(self) -> None:
        size = (int(self.image_size[0]), int(self.image_size[1]))
        if min(size) < 1:
            raise ValueError(f"image_size must be positive, got {size}")
        if self.layout != LAYOUT_NAME:
            raise FormatError(f"unsupported landmark layout {self.layout!r}")
        object.__setattr__(self, "image_size", size)


def encode_landmark_file(doc: LandmarkFile) -> str:
    """Serialize to canonical JSON text (sorted keys, shortest floats)."""
    payload = {
        "version": FORMAT_VERSION,
        "layout": doc.layout,
        "image_size": [doc.image_size[0], doc.image_size[1]],
        "fps": doc.sequence.fps,
        "frames": [frame.points.tolist() for frame in doc.sequence.frames],
    }
    return json.dumps(payload, sort_keys=True, allow_nan=False,
                      separators=(",", ":")) + "\n"


def decode_landmark_file(text: str) -> LandmarkFile:
    """Parse landmark file JSON, validating counts and finiteness."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"landmark file is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FormatError("landmark file must be a JSON object")
    version = payload.get("version")
    if version != FORMAT_VERSION:
        raise VersionUnsupportedError(version)
    layout = payload.get("layout")
    if layout != LAYOUT_NAME:
        raise FormatError(f"unsupported landmark layout {layout!r}")
    size = payload.get("image_size")
    if (not isinstance(size, list) or len(size) != 2
            or not all(isinstance(v, int) and v >= 1 for v in size)):
        raise FormatError(f"malformed image_size {size!r}")
    fps = payload.get("fps", 25.0)
    if (not isinstance(fps, (int, float)) or isinstance(fps, bool)
            or not math.isfinite(fps) or fps <= 0):
        raise FormatError(f"malformed fps {fps!r}")
    raw_frames = payload.get("frames")
    if not isinstance(raw_frames, list) or not raw_frames:
        raise FormatError("landmark file needs a non-empty 'frames' list")
    frames = []
    for index, raw in enumerate(raw_frames):
        try:
            arr = np.asarray(raw, dtype=np.float64)
        except (TypeError, ValueError) as exc:
            raise FormatError(f"frame {index}: malformed coordinates") from exc
        try:
            frames.append(LandmarkSet(arr))
        except WrongCountError as exc:
            raise WrongCountError(exc.got, context=f"frame {index}") from exc
        except NonFiniteError as exc:
            raise NonFiniteError(exc.position, context=f"frame {index} landmark") from exc
        except ValueError as exc:
            raise FormatError(f"frame {index}: {exc}") from exc
    return LandmarkFile(LandmarkSequence(tuple(frames), fps=float(fps)),
                        (size[0], size[1]))


def write_landmark_file(path, doc: LandmarkFile) -> None:
    Path(path).write_text(encode_landmark_file(doc))


def read_landmark_file(path) -> LandmarkFile:
    return decode_landmark_file(Path(path).read_text())
