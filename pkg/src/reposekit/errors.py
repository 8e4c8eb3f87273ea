"""Exception types shared across the toolkit."""
from __future__ import annotations


class ReposeError(Exception):
    """Base class for all toolkit errors."""


class WrongCountError(ReposeError):
    """A container holds the wrong number of landmark entries."""

    def __init__(self, got: int, expected: int = 68, context: str = "landmark set"):
        self.got = int(got)
        self.expected = int(expected)
        self.context = context
        super().__init__(f"{context}: expected {expected} points, got {got}")


class NonFiniteError(ReposeError):
    """A value that must be finite is NaN or infinite."""

    def __init__(self, position, context: str = "landmark"):
        self.position = position
        self.context = context
        super().__init__(f"non-finite {context} at position {position}")


class DegenerateEndpointsError(ReposeError):
    """Frame endpoints coincide, leaving the axis direction undefined."""

    def __init__(self, message: str = "frame endpoints coincide", *, part=None,
                 frame_index: int | None = None):
        self.part = part
        self.frame_index = frame_index
        detail = message
        if part is not None:
            detail += f" (part: {getattr(part, 'value', part)})"
        if frame_index is not None:
            detail += f" (frame {frame_index})"
        super().__init__(detail)


class DivergentRatioError(ReposeError):
    """A per-point coordinate update produced a non-finite output."""

    def __init__(self, landmark_index: int, frame_index: int | None = None):
        self.landmark_index = int(landmark_index)
        self.frame_index = frame_index
        detail = f"non-finite retargeted coordinate at landmark {landmark_index}"
        if frame_index is not None:
            detail += f" (frame {frame_index})"
        super().__init__(detail)


class OutOfBoundsError(ReposeError):
    """A pixel position lies outside the addressable grid."""

    def __init__(self, point, bounds):
        self.point = tuple(point)
        self.bounds = tuple(bounds)
        super().__init__(f"point {self.point} outside grid bounds {self.bounds}")


class MixedShapesError(ReposeError):
    """Feature maps that must agree in shape or resolution do not."""


class ZeroQueryError(ReposeError):
    """A query vector has zero norm, so cosine distance is undefined."""


class DimensionMismatchError(ReposeError):
    """Embedding vectors that must share a dimension do not."""

    def __init__(self, got: int, expected: int):
        self.got = int(got)
        self.expected = int(expected)
        super().__init__(f"embedding dimension {got} does not match {expected}")


class EmptyGalleryError(ReposeError):
    """A gallery or domain list contains no candidates."""


class MissingPartError(ReposeError):
    """A per-part mapping lacks one of the five facial parts."""

    def __init__(self, part):
        self.part = part
        super().__init__(f"missing facial part: {getattr(part, 'value', part)}")


class DegenerateBoxError(ReposeError):
    """A bounding box is too small to normalize by."""


class LengthMismatchError(ReposeError):
    """Two sequences that must have equal frame counts do not."""

    def __init__(self, got: int, expected: int):
        self.got = int(got)
        self.expected = int(expected)
        super().__init__(f"sequence length {got} does not match {expected}")


class FormatError(ReposeError):
    """A serialized file violates its format contract."""


class BadMagicError(FormatError):
    """A binary file does not start with the expected magic bytes."""

    def __init__(self, got: bytes, expected: bytes):
        self.got = bytes(got)
        self.expected = bytes(expected)
        super().__init__(f"bad magic {self.got!r}, expected {self.expected!r}")


class VersionUnsupportedError(FormatError):
    """A file declares a format version this reader does not support."""

    def __init__(self, got, supported=1):
        self.got = got
        self.supported = supported
        super().__init__(f"unsupported format version {got}, supported: {supported}")


class TruncatedPayloadError(FormatError):
    """A file ends before its declared payload is complete."""

    def __init__(self, offset: int, expected: int | None = None):
        self.offset = int(offset)
        self.expected = None if expected is None else int(expected)
        detail = f"data ends at byte {offset}"
        if expected is not None:
            detail += f", expected {expected} bytes"
        super().__init__(detail)


class TrailingDataError(FormatError):
    """A file continues past its declared payload."""

    def __init__(self, offset: int):
        self.offset = int(offset)
        super().__init__(f"unexpected trailing bytes after offset {offset}")
