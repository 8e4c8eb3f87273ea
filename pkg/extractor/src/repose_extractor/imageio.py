"""Image loading for the extractor."""
from __future__ import annotations

from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError

from .errors import ImageError


def load_image(path, size: int) -> torch.Tensor:
    """Load an image as a (1, 3, size, size) float32 tensor in [0, 1]."""
    try:
        with Image.open(Path(path)) as img:
            rgb = img.convert("RGB").resize((size, size), Image.Resampling.BILINEAR)
    except (UnidentifiedImageError, OSError) as exc:
        if isinstance(exc, FileNotFoundError):
            raise
        raise ImageError(f"cannot read image {path}: {exc}") from exc
    pixels = np.asarray(rgb, dtype=np.float32) / 255.0
    return torch.from_numpy(pixels).permute(2, 0, 1).unsqueeze(0).contiguous()
