"""Deterministic noising walk that surfaces intermediate denoiser features.

The image is encoded to a latent and walked forward along the noise
schedule: at each step the denoiser predicts the noise for the current
latent and the latent is advanced one schedule step,

    z_s = sqrt(abar_s / abar_{s-1}) * z_{s-1}
          + sqrt(abar_s) * (sqrt(1/abar_s - 1) - sqrt(1/abar_{s-1} - 1)) * eps

with abar_0 = 1. The activation tapped at the configured layer during the
final denoiser call (the one consuming z_{t-1}) is the extracted feature.

The walk itself is conditioned on the image's own pooled latent statistics;
the final, feature-producing call is conditioned on the prompt image instead
(cross-image prompting), falling back to self-prompting when none is given.
"""
from __future__ import annotations

import math

import numpy as np
import torch

from .backbone import TinyCondUNet
from .config import ExtractorConfig
from .errors import ConfigError
from .imageio import load_image
from .schedule import alpha_bar_schedule, check_step
from .writers import write_tensor_file


def invert_to_feature(image: torch.Tensor, config: ExtractorConfig,
                      prompt_image: torch.Tensor | None = None,
                      model: TinyCondUNet | None = None) -> np.ndarray:
    """Run the forward walk and return the tapped activation as (C, H, W)."""
    check_step(config.time_step, config)
    if model is None:
        model = TinyCondUNet(config.backbone, config.adapter)
    bars = alpha_bar_schedule(config)

    self_latent = model.encode(image)
    prompt_latent = (self_latent if prompt_image is None
                     else model.encode(prompt_image))
    z = self_latent
    feature = None
    for step in range(1, config.time_step + 1):
        final = step == config.time_step
        cond = model.condition(step - 1, config.text_prompt,
                               prompt_latent if final else self_latent)
        eps, taps = model(z, cond)
        if final:
            feature = taps[config.unet_layer]
        prev_bar, cur_bar = bars[step - 1], bars[step]
        carry = math.sqrt(cur_bar / prev_bar)
        push = math.sqrt(cur_bar) * (
            math.sqrt(1.0 / cur_bar - 1.0) - math.sqrt(1.0 / prev_bar - 1.0))
        z = carry * z + push * eps
    if feature is None:  # unreachable: time_step >= 1 enforced above
        raise ConfigError("no denoiser step executed")
    return feature[0].numpy().astype(np.float32, copy=False)


def extract_feature(image_path, out_path, config: ExtractorConfig | None = None,
                    prompt_image_path=None,
                    model: TinyCondUNet | None = None) -> np.ndarray:
    """Extract a feature map from an image file and write it as a tensor file.

    ``prompt_image_path`` selects the image-prompt conditioning for the final
    denoiser call (cross-image prompting); it defaults to the input image.
    """
    if config is None:
        config = ExtractorConfig()
    image = load_image(image_path, config.image_size)
    prompt = (None if prompt_image_path is None
              else load_image(prompt_image_path, config.image_size))
    feature = invert_to_feature(image, config, prompt_image=prompt, model=model)
    write_tensor_file(out_path, feature)
    return feature
