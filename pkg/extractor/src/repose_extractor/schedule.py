"""Scaled-linear diffusion noise schedule.

Betas interpolate linearly in sqrt space between the start and end values;
alpha_bar is the running product of (1 - beta). Index 0 of ``alpha_bar``
is defined as exactly 1 (the clean-image endpoint), so ``alpha_bar[s]``
corresponds to schedule step ``s`` for s in [0, num_train_steps].
"""
from __future__ import annotations

import numpy as np

from .config import ExtractorConfig
from .errors import ConfigError


def alpha_bar_schedule(config: ExtractorConfig) -> np.ndarray:
    """Cumulative signal coefficients, shape (num_train_steps + 1,), float64."""
    sqrt_betas = np.linspace(
        np.sqrt(config.beta_start),
        np.sqrt(config.beta_end),
        config.num_train_steps,
        dtype=np.float64,
    )
    alphas = 1.0 - sqrt_betas**2
    bars = np.empty(config.num_train_steps + 1, dtype=np.float64)
    bars[0] = 1.0
    np.cumprod(alphas, out=bars[1:])
    return bars


def check_step(step: int, config: ExtractorConfig) -> None:
    if not (1 <= step <= config.num_train_steps):
        raise ConfigError(
            f"schedule step {step} outside [1, {config.num_train_steps}]")
