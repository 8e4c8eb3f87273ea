"""Exception types for the extractor sidecar."""
from __future__ import annotations


class ExtractorError(Exception):
    """Base class for extractor failures."""


class ConfigError(ExtractorError):
    """A configuration value is outside its valid range."""


class BackboneError(ExtractorError):
    """The requested backbone or adapter identifier cannot be loaded."""


class ImageError(ExtractorError):
    """An input image cannot be read or is unusable."""
