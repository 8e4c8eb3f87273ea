"""Feature and embedding extraction sidecar for the reposing toolkit.

Produces the toolkit's binary tensor (FSHT) and embedding (FSHE) files
from images, using a deterministic seeded denoising backbone so outputs
are reproducible across machines without any downloaded weights.
"""
from .backbone import TinyCondUNet, feature_shape
from .config import ExtractorConfig
from .embedding import EMBED_DIM, embed_image, extract_embedding
from .errors import (
    BackboneError,
    ConfigError,
    ExtractorError,
    ImageError,
)
from .inversion import extract_feature, invert_to_feature
from .schedule import alpha_bar_schedule
from .writers import (
    embedding_bytes,
    tensor_bytes,
    write_embedding_file,
    write_tensor_file,
)

__version__ = "0.1.0"

__all__ = [
    "BackboneError",
    "ConfigError",
    "EMBED_DIM",
    "ExtractorConfig",
    "ExtractorError",
    "ImageError",
    "TinyCondUNet",
    "alpha_bar_schedule",
    "embed_image",
    "embedding_bytes",
    "extract_embedding",
    "extract_feature",
    "feature_shape",
    "invert_to_feature",
    "tensor_bytes",
    "write_embedding_file",
    "write_tensor_file",
    "__version__",
]
