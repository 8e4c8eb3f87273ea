"""Extraction configuration.

Defaults: inversion stops at schedule step 301 and taps layer 6 of the
denoiser; galleries are built from 10 target images per domain; the text
prompt describes a generic face. The noise schedule is the scaled-linear
1000-step schedule the backbone was built with.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ConfigError

DEFAULT_BACKBONE = "tiny-cond-unet-v1"
DEFAULT_ADAPTER = "latent-stats-v1"
DEFAULT_EMBEDDER = "patch-projection-v1"


@dataclass(frozen=True)
class ExtractorConfig:
    time_step: int = 301
    unet_layer: int = 6
    target_count: int = 10
    text_prompt: str = "a photo of a face"
    backbone: str = DEFAULT_BACKBONE
    adapter: str = DEFAULT_ADAPTER
    image_size: int = 256
    num_train_steps: int = 1000
    beta_start: float = 0.00085
    beta_end: float = 0.012

    def __post_init__(self) -> None:
        if not (1 <= self.time_step <= self.num_train_steps):
            raise ConfigError(
                f"time_step {self.time_step} outside schedule [1, {self.num_train_steps}]")
        if not (1 <= self.unet_layer <= 7):
            raise ConfigError(f"unet_layer must be in 1..7, got {self.unet_layer}")
        if self.target_count < 1:
            raise ConfigError(f"target_count must be at least 1, got {self.target_count}")
        if self.image_size < 32 or self.image_size % 8 != 0:
            raise ConfigError(
                f"image_size must be a multiple of 8 and at least 32, got {self.image_size}")
        if self.num_train_steps < 2:
            raise ConfigError(f"num_train_steps too small: {self.num_train_steps}")
        if not (0.0 < self.beta_start < self.beta_end < 1.0):
            raise ConfigError(
                f"betas must satisfy 0 < start < end < 1, got ({self.beta_start}, {self.beta_end})")
