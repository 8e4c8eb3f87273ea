"""Global appearance embeddings via a fixed random projection.

The image is resampled to a small fixed grid, flattened (with a constant
bias feature so no input maps to the zero vector), projected through a
deterministic Gaussian matrix, and L2-normalized. The projection matrix is
regenerated from a fixed seed, so embeddings are reproducible everywhere.
"""
from __future__ import annotations

import hashlib

import numpy as np
import torch

from .errors import ImageError
from .imageio import load_image
from .writers import write_embedding_file

EMBED_DIM = 128
EMBED_SIDE = 64
EMBEDDER_ID = "patch-projection-v1"

_INPUT_DIM = 3 * EMBED_SIDE * EMBED_SIDE + 1


def _projection_matrix() -> np.ndarray:
    digest = hashlib.sha256(("embedder:" + EMBEDDER_ID).encode("utf-8")).digest()
    gen = torch.Generator().manual_seed(int.from_bytes(digest[:8], "big"))
    matrix = torch.randn(EMBED_DIM, _INPUT_DIM, generator=gen, dtype=torch.float32)
    return matrix.numpy().astype(np.float64) / np.sqrt(_INPUT_DIM)


def embed_image(image: torch.Tensor) -> np.ndarray:
    """Project a (1, 3, side, side) tensor in [0, 1] to a unit vector (float64)."""
    flat = image.reshape(-1).numpy().astype(np.float64)
    features = np.concatenate([flat, [1.0]])
    vector = _projection_matrix() @ features
    norm = float(np.linalg.norm(vector))
    if norm < 1e-12:
        raise ImageError("image projects to a degenerate embedding")
    return vector / norm


def extract_embedding(image_path, out_path) -> np.ndarray:
    """Embed an image file and write the vector as an embedding file."""
    image = load_image(image_path, EMBED_SIDE)
    vector = embed_image(image)
    write_embedding_file(out_path, vector)
    return vector
