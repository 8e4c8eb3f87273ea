import numpy as np
import pytest
from PIL import Image


def _checker_face(rng: np.random.Generator, size: int = 96) -> Image.Image:
    """A deterministic face-like test card: oval on a noisy background."""
    noise = rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)
    ys, xs = np.mgrid[0:size, 0:size].astype(np.float64)
    cy, cx = size / 2.0, size / 2.0
    oval = ((ys - cy) / (size * 0.42)) ** 2 + ((xs - cx) / (size * 0.33)) ** 2 <= 1.0
    noise[oval] = (224, 172, 140)
    eye = ((ys - size * 0.4) ** 2 + (xs - size * 0.35) ** 2) <= (size * 0.04) ** 2
    noise[eye] = (30, 30, 30)
    return Image.fromarray(noise, mode="RGB")


@pytest.fixture(scope="session")
def face_image(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("images") / "face.png"
    _checker_face(np.random.default_rng(11)).save(path)
    return str(path)


@pytest.fixture(scope="session")
def other_image(tmp_path_factory) -> str:
    path = tmp_path_factory.mktemp("images") / "other.png"
    _checker_face(np.random.default_rng(99), size=80).save(path)
    return str(path)
