"""Self-contained conditional denoising backbone.

``TinyCondUNet`` is a small latent-space UNet whose weights are generated
deterministically from the backbone identifier, so the same id always yields
the same network on every machine with no downloads. An image of side S is
encoded to a 4-channel latent of side S/8, and the denoiser exposes seven
numbered activations:

    layer 1: (32,  S/8,  S/8)   input block
    layer 2: (64,  S/16, S/16)  down block
    layer 3: (96,  S/32, S/32)  down block
    layer 4: (96,  S/32, S/32)  bottleneck
    layer 5: (64,  S/16, S/16)  up block (skip from layer 2)
    layer 6: (48,  S/8,  S/8)   up block (skip from layer 1)
    layer 7: (4,   S/8,  S/8)   noise prediction head

Conditioning is a single 64-dimensional vector — the sum of a sinusoidal
step embedding, a deterministic text-prompt embedding, and an image-prompt
adapter applied to pooled latent statistics — injected into every block via
feature-wise scale and shift.
"""
from __future__ import annotations

import hashlib
import math

import torch
from torch import nn
from torch.nn import functional as F

from .errors import BackboneError

COND_DIM = 64
LATENT_CHANNELS = 4
ADAPTER_STATS = 24  # 6 pooled statistics for each of the 4 latent channels

KNOWN_BACKBONES = ("tiny-cond-unet-v1",)
KNOWN_ADAPTERS = ("latent-stats-v1",)

_LAYER_CHANNELS = {1: 32, 2: 64, 3: 96, 4: 96, 5: 64, 6: 48, 7: 4}


def _seed_from(text: str) -> int:
    digest = hashlib.sha256(text.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def feature_shape(layer: int, image_size: int) -> tuple[int, int, int]:
    """Spatial shape (channels, height, width) of a numbered activation."""
    if layer not in _LAYER_CHANNELS:
        raise BackboneError(f"layer {layer} outside valid range 1..7")
    grid = -(-image_size // 8)
    half = -(-grid // 2)
    quarter = -(-half // 2)
    side = {1: grid, 2: half, 3: quarter, 4: quarter, 5: half, 6: grid, 7: grid}[layer]
    return (_LAYER_CHANNELS[layer], side, side)


def step_embedding(step: int, dim: int = COND_DIM) -> torch.Tensor:
    """Sinusoidal embedding of a schedule step, shape (dim,), float32."""
    half = dim // 2
    freqs = torch.exp(
        -math.log(10_000.0) * torch.arange(half, dtype=torch.float64) / (half - 1))
    angles = float(step) * freqs
    emb = torch.cat([torch.sin(angles), torch.cos(angles)])
    return emb.to(torch.float32)


def text_embedding(prompt: str, dim: int = COND_DIM) -> torch.Tensor:
    """Deterministic unit-norm embedding of a prompt string."""
    gen = torch.Generator().manual_seed(_seed_from("text:" + prompt))
    vec = torch.randn(dim, generator=gen, dtype=torch.float32)
    return vec / vec.norm()


def pooled_latent_stats(latent: torch.Tensor) -> torch.Tensor:
    """Per-channel pooled statistics of a (1, 4, H, W) latent, shape (24,)."""
    flat = latent.reshape(latent.shape[1], -1)
    stats = torch.stack(
        [
            flat.mean(dim=1),
            flat.std(dim=1, unbiased=False),
            flat.min(dim=1).values,
            flat.max(dim=1).values,
            flat.abs().mean(dim=1),
            (flat**2).mean(dim=1).sqrt(),
        ],
        dim=1,
    )
    return stats.reshape(-1)


class _FilmBlock(nn.Module):
    """Convolution followed by conditioned scale/shift and SiLU."""

    def __init__(self, in_ch: int, out_ch: int, stride: int = 1):
        super().__init__()
        self.conv = nn.Conv2d(in_ch, out_ch, kernel_size=3, stride=stride, padding=1)
        self.film = nn.Linear(COND_DIM, 2 * out_ch)

    def forward(self, x: torch.Tensor, cond: torch.Tensor) -> torch.Tensor:
        h = self.conv(x)
        scale, shift = self.film(cond).chunk(2, dim=-1)
        h = h * (1.0 + scale[None, :, None, None]) + shift[None, :, None, None]
        return F.silu(h)


class TinyCondUNet(nn.Module):
    """Deterministic conditional UNet over 4-channel latents."""

    def __init__(self, backbone: str = KNOWN_BACKBONES[0],
                 adapter: str = KNOWN_ADAPTERS[0]):
        if backbone not in KNOWN_BACKBONES:
            raise BackboneError(f"unknown backbone id {backbone!r}")
        if adapter not in KNOWN_ADAPTERS:
            raise BackboneError(f"unknown adapter id {adapter!r}")
        super().__init__()
        torch.set_num_threads(1)
        self.backbone_id = backbone
        self.adapter_id = adapter

        self.encoder = nn.Sequential(
            nn.Conv2d(3, 8, kernel_size=3, stride=2, padding=1), nn.SiLU(),
            nn.Conv2d(8, 16, kernel_size=3, stride=2, padding=1), nn.SiLU(),
            nn.Conv2d(16, LATENT_CHANNELS, kernel_size=3, stride=2, padding=1),
        )
        self.image_adapter = nn.Linear(ADAPTER_STATS, COND_DIM)

        self.block1 = _FilmBlock(LATENT_CHANNELS, 32)
        self.block2 = _FilmBlock(32, 64, stride=2)
        self.block3 = _FilmBlock(64, 96, stride=2)
        self.block4 = _FilmBlock(96, 96)
        self.block5 = _FilmBlock(96 + 64, 64)
        self.block6 = _FilmBlock(64 + 32, 48)
        self.head = nn.Conv2d(48, LATENT_CHANNELS, kernel_size=3, padding=1)

        self._init_weights()
        self.eval()

    def _init_weights(self) -> None:
        gen = torch.Generator().manual_seed(_seed_from("weights:" + self.backbone_id))
        with torch.no_grad():
            for _, param in sorted(self.named_parameters(), key=lambda kv: kv[0]):
                values = torch.randn(
                    param.shape, generator=gen, dtype=torch.float32) * 0.08
                param.copy_(values)

    def encode(self, image: torch.Tensor) -> torch.Tensor:
        """Map a (1, 3, S, S) image in [0, 1] to a (1, 4, S/8, S/8) latent."""
        with torch.no_grad():
            return self.encoder(image * 2.0 - 1.0)

    def condition(self, step: int, prompt: str, prompt_latent: torch.Tensor
                  ) -> torch.Tensor:
        """Combined conditioning vector for one denoiser call."""
        with torch.no_grad():
            adapted = self.image_adapter(pooled_latent_stats(prompt_latent))
        return step_embedding(step) + text_embedding(prompt) + adapted

    def forward(self, latent: torch.Tensor, cond: torch.Tensor
                ) -> tuple[torch.Tensor, dict[int, torch.Tensor]]:
        """Predict noise for a (1, 4, G, G) latent.

        Returns the prediction and all seven numbered activations.
        """
        with torch.no_grad():
            h1 = self.block1(latent, cond)
            h2 = self.block2(h1, cond)
            h3 = self.block3(h2, cond)
            h4 = self.block4(h3, cond)
            up5 = F.interpolate(h4, size=h2.shape[-2:], mode="nearest")
            h5 = self.block5(torch.cat([up5, h2], dim=1), cond)
            up6 = F.interpolate(h5, size=h1.shape[-2:], mode="nearest")
            h6 = self.block6(torch.cat([up6, h1], dim=1), cond)
            eps = self.head(h6)
        return eps, {1: h1, 2: h2, 3: h3, 4: h4, 5: h5, 6: h6, 7: eps}
