"""Binary writers for the downstream toolkit's tensor and embedding files.

Both formats are little-endian: a 4-byte magic, a uint32 version, uint32
dimensions, then the float32 payload in C order. Implemented here directly
so the extractor stays a standalone producer of the wire format.
"""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

TENSOR_MAGIC = b"FSHT"
EMBEDDING_MAGIC = b"FSHE"
FORMAT_VERSION = 1

_TENSOR_HEADER = struct.Struct("<4sIIII")
_EMBEDDING_HEADER = struct.Struct("<4sII")


def tensor_bytes(data: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(data, dtype="<f4")
    if arr.ndim != 3 or min(arr.shape) < 1:
        raise ValueError(f"tensor payload must be (C, H, W) and non-empty, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError("tensor payload contains non-finite values")
    c, h, w = arr.shape
    return _TENSOR_HEADER.pack(TENSOR_MAGIC, FORMAT_VERSION, c, h, w) + arr.tobytes()


def embedding_bytes(values: np.ndarray) -> bytes:
    arr = np.ascontiguousarray(values, dtype="<f4").reshape(-1)
    if arr.size < 1:
        raise ValueError("embedding must be non-empty")
    if not np.isfinite(arr).all():
        raise ValueError("embedding contains non-finite values")
    return _EMBEDDING_HEADER.pack(
        EMBEDDING_MAGIC, FORMAT_VERSION, arr.size) + arr.tobytes()


def write_tensor_file(path, data: np.ndarray) -> None:
    Path(path).write_bytes(tensor_bytes(data))


def write_embedding_file(path, values: np.ndarray) -> None:
    Path(path).write_bytes(embedding_bytes(values))
