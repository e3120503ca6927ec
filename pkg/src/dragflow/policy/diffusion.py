"""Noise-prediction diffusion head used as a modeling baseline."""
from __future__ import annotations

import numpy as np

from ..core import ActionChunk
from .encoding import anchor, decode_chunk, from_training_space, training_bounds, xy_to_net
from .flow import VelocityField

COSINE_OFFSET = 0.008
ALPHA_BAR_MIN = 1e-4


def alpha_bar(t) -> np.ndarray:
    """Cosine schedule for the cumulative signal fraction, 1 at t=0."""
    t = np.asarray(t, dtype=float)
    f = np.cos((t + COSINE_OFFSET) / (1 + COSINE_OFFSET) * np.pi / 2) ** 2
    f0 = np.cos(COSINE_OFFSET / (1 + COSINE_OFFSET) * np.pi / 2) ** 2
    return np.clip(f / f0, ALPHA_BAR_MIN, 1.0)


class NoisePredictor(VelocityField):
    """Same conditioning and layout as the velocity field, but regresses the injected noise."""

    def predict_noise(self, x, t, obs, state) -> np.ndarray:
        return self.velocity(x, t, obs, state)


def diffusion_loss(net: NoisePredictor, obs, state, clean, noise, t):
    """Mean squared noise-prediction error and parameter gradients (network-space inputs)."""
    clean, noise = np.asarray(clean, dtype=float), np.asarray(noise, dtype=float)
    t = np.asarray(t, dtype=float).reshape(-1)
    ab = alpha_bar(t)[:, None, None]
    x_t = np.sqrt(ab) * clean + np.sqrt(1.0 - ab) * noise
    for p in net.parameters():
        p.grad = None
    pred = net.forward(x_t, t, obs, state)
    loss = ((pred - noise) ** 2).sum(-1).mean()
    loss.backward()
    return float(loss.data), [np.zeros_like(p.data) if p.grad is None else p.grad for p in net.parameters()]


def denoise(net, x, obs, state, N: int, rng_noise, bounds=(-1.0, 1.0)) -> np.ndarray:
    """Ancestral sampling over ``N`` evenly spaced steps from t=1 down to t=0.

    ``rng_noise(i)`` supplies the fresh Gaussian draw for step ``i``; the
    clean-chunk estimate is clipped to ``bounds`` at every step.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    x = np.array(x, dtype=float)
    for i in range(N, 0, -1):
        t, s = i / N, (i - 1) / N
        ab_t, ab_s = float(alpha_bar(t)), float(alpha_bar(s))
        eps = net.predict_noise(x, t, obs, state)
        x0 = np.clip((x - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t), *bounds)
        a_ts = ab_t / ab_s
        beta = 1.0 - a_ts
        mean = (np.sqrt(ab_s) * beta / (1.0 - ab_t)) * x0 + (np.sqrt(a_ts) * (1.0 - ab_s) / (1.0 - ab_t)) * x
        var = beta * (1.0 - ab_s) / (1.0 - ab_t)
        x = mean + np.sqrt(var) * rng_noise(i) if var > 0 else mean
    return x


def denoise_chunks(net, obs, state_px, N: int, noise: np.ndarray, step_noise: np.ndarray) -> np.ndarray:
    """Batched denoising; ``step_noise`` has shape ``(N, B, H, 3)``."""
    obs = np.asarray(obs, dtype=float)
    state = xy_to_net(state_px)
    a = anchor(obs, state)
    raw = denoise(net, noise, obs, state, N, lambda i: step_noise[i - 1], training_bounds(a))
    return decode_chunk(from_training_space(raw, a))


def draw_noise(rng: np.random.Generator, H: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Initial and per-step noise for one chunk, drawn in a fixed order."""
    return rng.standard_normal((H, 3)), rng.standard_normal((N, H, 3))


def denoise_chunk(net, obs, state_px, N: int = 16, seed: int = 0) -> ActionChunk:
    rng = np.random.default_rng(seed)
    init, steps = draw_noise(rng, net.H, N)
    out = denoise_chunks(net, np.asarray(obs, dtype=float)[None], np.asarray(state_px, dtype=float)[None],
                         N, init[None], steps[:, None])
    return ActionChunk(out[0])
