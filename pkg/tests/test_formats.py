"""Binary tensor/embedding files and JSON landmark files."""
from __future__ import annotations

import json
import math
import struct

import numpy as np
import pytest

from reposekit import (
    BadMagicError,
    FormatError,
    LandmarkFile,
    LandmarkSequence,
    LandmarkSet,
    NonFiniteError,
    TrailingDataError,
    TruncatedPayloadError,
    VersionUnsupportedError,
    WrongCountError,
    decode_embedding,
    decode_landmark_file,
    decode_tensor,
    encode_embedding,
    encode_landmark_file,
    encode_tensor,
    read_embedding,
    read_landmark_file,
    read_tensor,
    write_embedding,
    write_landmark_file,
    write_tensor,
)
from reposekit.synthetic import synthetic_face, synthetic_motion

TENSOR_HEADER = 20
EMBEDDING_HEADER = 12


# --- tensor files -----------------------------------------------------------

def test_tensor_roundtrip_bitwise():
    rng = np.random.default_rng(51)
    for _ in range(50):
        shape = tuple(int(rng.integers(1, 6)) for _ in range(3))
        data = rng.normal(size=shape).astype(np.float32)
        back = decode_tensor(encode_tensor(data))
        assert back.dtype == np.float32
        assert np.array_equal(back, data)


def test_tensor_layout_on_disk():
    data = np.arange(24, dtype=np.float32).reshape(2, 3, 4)
    blob = encode_tensor(data)
    assert blob[:4] == b"FSHT"
    magic, version, c, h, w = struct.unpack_from("<4sIIII", blob)
    assert (version, c, h, w) == (1, 2, 3, 4)
    assert len(blob) == TENSOR_HEADER + 4 * 24
    # Channel-major then row-major float32, little endian.
    assert struct.unpack_from("<f", blob, TENSOR_HEADER)[0] == 0.0
    assert struct.unpack_from("<f", blob, TENSOR_HEADER + 4 * 5)[0] == 5.0


def test_tensor_file_roundtrip(tmp_path):
    data = np.random.default_rng(52).normal(size=(3, 4, 5)).astype(np.float32)
    path = tmp_path / "map.fsht"
    write_tensor(path, data)
    assert np.array_equal(read_tensor(path), data)


def test_encode_tensor_rejects_bad_input():
    with pytest.raises(ValueError):
        encode_tensor(np.zeros((2, 2), dtype=np.float32))
    with pytest.raises(ValueError):
        encode_tensor(np.zeros((1, 0, 2), dtype=np.float32))
    bad = np.zeros((1, 2, 2), dtype=np.float32)
    bad[0, 1, 1] = np.inf
    with pytest.raises(NonFiniteError) as info:
        encode_tensor(bad)
    assert info.value.position == 3


def test_decode_tensor_bad_magic():
    blob = encode_tensor(np.ones((1, 2, 2), dtype=np.float32))
    with pytest.raises(BadMagicError) as info:
        decode_tensor(b"XXXX" + blob[4:])
    assert info.value.got == b"XXXX"
    assert info.value.expected == b"FSHT"
    # An embedding file fed to the tensor reader fails the same way.
    with pytest.raises(BadMagicError):
        decode_tensor(encode_embedding(np.ones(3)))


def test_decode_tensor_truncated_header():
    blob = encode_tensor(np.ones((1, 2, 2), dtype=np.float32))
    with pytest.raises(TruncatedPayloadError) as info:
        decode_tensor(blob[:7])
    assert info.value.offset == 7
    assert info.value.expected == TENSOR_HEADER
    with pytest.raises(TruncatedPayloadError):
        decode_tensor(b"FS")  # too short even for the magic


def test_decode_tensor_version():
    blob = bytearray(encode_tensor(np.ones((1, 2, 2), dtype=np.float32)))
    struct.pack_into("<I", blob, 4, 9)
    with pytest.raises(VersionUnsupportedError) as info:
        decode_tensor(bytes(blob))
    assert info.value.got == 9


def test_decode_tensor_zero_dimension():
    blob = struct.pack("<4sIIII", b"FSHT", 1, 1, 0, 2)
    with pytest.raises(FormatError):
        decode_tensor(blob)


def test_decode_tensor_truncated_payload():
    blob = encode_tensor(np.ones((1, 2, 2), dtype=np.float32))
    with pytest.raises(TruncatedPayloadError) as info:
        decode_tensor(blob[:-4])
    assert info.value.offset == len(blob) - 4
    assert info.value.expected == len(blob)


def test_decode_tensor_trailing_data():
    blob = encode_tensor(np.ones((1, 2, 2), dtype=np.float32))
    with pytest.raises(TrailingDataError) as info:
        decode_tensor(blob + b"\x00")
    assert info.value.offset == len(blob)


def test_decode_tensor_nonfinite_positioned():
    data = np.ones((2, 3, 3), dtype=np.float32)
    blob = bytearray(encode_tensor(data))
    index = 7
    struct.pack_into("<f", blob, TENSOR_HEADER + 4 * index, math.nan)
    with pytest.raises(NonFiniteError) as info:
        decode_tensor(bytes(blob))
    assert info.value.position == TENSOR_HEADER + 4 * index
    struct.pack_into("<f", blob, TENSOR_HEADER + 4 * index, math.inf)
    with pytest.raises(NonFiniteError):
        decode_tensor(bytes(blob))


# --- embedding files --------------------------------------------------------

def test_embedding_roundtrip_bitwise():
    rng = np.random.default_rng(53)
    for _ in range(50):
        values = rng.normal(size=int(rng.integers(1, 40))).astype(np.float32)
        back = decode_embedding(encode_embedding(values))
        assert back.dtype == np.float32
        assert np.array_equal(back, values)


def test_embedding_layout_on_disk(tmp_path):
    values = np.array((1.5, -2.25, 0.0), dtype=np.float32)
    blob = encode_embedding(values)
    assert blob[:4] == b"FSHE"
    magic, version, dim = struct.unpack_from("<4sII", blob)
    assert (version, dim) == (1, 3)
    assert len(blob) == EMBEDDING_HEADER + 4 * 3
    path = tmp_path / "vec.fshe"
    write_embedding(path, values)
    assert np.array_equal(read_embedding(path), values)


def test_embedding_errors():
    with pytest.raises(ValueError):
        encode_embedding(np.zeros(0))
    with pytest.raises(NonFiniteError):
        encode_embedding(np.array((1.0, math.nan)))

    blob = encode_embedding(np.ones(4, dtype=np.float32))
    with pytest.raises(BadMagicError):
        decode_embedding(b"ZZZZ" + blob[4:])
    with pytest.raises(TruncatedPayloadError) as info:
        decode_embedding(blob[:-2])
    assert info.value.offset == len(blob) - 2
    with pytest.raises(TrailingDataError):
        decode_embedding(blob + b"!")

    header = bytearray(blob)
    struct.pack_into("<I", header, 4, 3)
    with pytest.raises(VersionUnsupportedError):
        decode_embedding(bytes(header))
    with pytest.raises(FormatError):
        decode_embedding(struct.pack("<4sII", b"FSHE", 1, 0))

    payload = bytearray(blob)
    struct.pack_into("<f", payload, EMBEDDING_HEADER + 8, -math.inf)
    with pytest.raises(NonFiniteError) as info:
        decode_embedding(bytes(payload))
    assert info.value.position == EMBEDDING_HEADER + 8


# --- landmark files ---------------------------------------------------------

def _sample_doc(frames: int = 3) -> LandmarkFile:
    rng = np.random.default_rng(54)
    base = synthetic_face(rng=rng, jitter=1.0)
    seq = synthetic_motion(base, frames=frames, rng=rng, fps=30.0)
    return LandmarkFile(seq, (512, 512))


def test_landmark_file_roundtrip_bitwise():
    doc = _sample_doc()
    text = encode_landmark_file(doc)
    back = decode_landmark_file(text)
    assert back.image_size == (512, 512)
    assert back.layout == "ibug68"
    assert back.sequence.fps == 30.0
    assert np.array_equal(back.sequence.as_array(), doc.sequence.as_array())


def test_landmark_file_canonical_encoding():
    doc = _sample_doc()
    text = encode_landmark_file(doc)
    assert text == encode_landmark_file(doc)
    assert text.endswith("\n")
    assert ": " not in text and ", " not in text
    payload = json.loads(text)
    assert list(payload) == sorted(payload)
    assert payload["version"] == 1
    # Re-encoding a decoded document reproduces the exact text.
    assert encode_landmark_file(decode_landmark_file(text)) == text


def test_landmark_file_io(tmp_path):
    doc = _sample_doc(frames=2)
    path = tmp_path / "seq.json"
    write_landmark_file(path, doc)
    back = read_landmark_file(path)
    assert np.array_equal(back.sequence.as_array(), doc.sequence.as_array())


def test_landmark_file_type_validation():
    doc = _sample_doc(frames=1)
    with pytest.raises(ValueError):
        LandmarkFile(doc.sequence, (0, 512))
    with pytest.raises(FormatError):
        LandmarkFile(doc.sequence, (512, 512), layout="aflw21")


def _payload(**overrides):
    doc = _sample_doc(frames=2)
    payload = json.loads(encode_landmark_file(doc))
    payload.update(overrides)
    return payload


def _decode(payload) -> LandmarkFile:
    return decode_landmark_file(json.dumps(payload))


def test_decode_landmark_file_errors():
    with pytest.raises(FormatError):
        decode_landmark_file("{oops")
    with pytest.raises(FormatError):
        decode_landmark_file("[1,2]")
    with pytest.raises(VersionUnsupportedError) as info:
        _decode(_payload(version=2))
    assert info.value.got == 2
    with pytest.raises(FormatError):
        _decode(_payload(layout="openface"))
    for bad_size in ([512], [512, 0], [0.5, 512], "512x512", None):
        with pytest.raises(FormatError):
            _decode(_payload(image_size=bad_size))
    for bad_fps in (0, -5, "fast", True, math.inf):
        with pytest.raises(FormatError):
            _decode(_payload(fps=bad_fps))
    with pytest.raises(FormatError):
        _decode(_payload(frames=[]))
    with pytest.raises(FormatError):
        _decode(_payload(frames="none"))


def test_decode_landmark_file_frame_errors():
    payload = _payload()
    short = [list(p) for p in payload["frames"][1]][:67]
    with pytest.raises(WrongCountError) as info:
        _decode(_payload(frames=[payload["frames"][0], short]))
    assert info.value.got == 67
    assert "frame 1" in str(info.value)

    bad = [list(p) for p in payload["frames"][0]]
    bad[5][1] = math.nan  # json.dumps writes NaN, reader must reject it
    with pytest.raises(NonFiniteError) as info:
        _decode(_payload(frames=[bad]))
    assert "frame 0" in str(info.value)

    ragged = [list(p) for p in payload["frames"][0]]
    ragged[3] = [1.0, 2.0, 3.0]
    with pytest.raises(FormatError):
        _decode(_payload(frames=[ragged]))


def test_decode_landmark_file_defaults_fps():
    payload = _payload()
    del payload["fps"]
    assert _decode(payload).sequence.fps == 25.0
