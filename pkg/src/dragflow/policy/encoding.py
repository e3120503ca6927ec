"""Conversion between pixel-space action chunks and the network's [-1, 1] space."""
from __future__ import annotations

import numpy as np

from ..core import SCREEN_H, SCREEN_W

_SCALE = np.array([2.0 / SCREEN_W, 2.0 / SCREEN_H])


def xy_to_net(xy) -> np.ndarray:
    return np.asarray(xy, dtype=float) * _SCALE - 1.0


def xy_from_net(z) -> np.ndarray:
    return (np.asarray(z, dtype=float) + 1.0) / _SCALE


def encode_chunk(arr) -> np.ndarray:
    """Pixel chunk ``[..., H, 3]`` (m: 1 held, 0 released) to network space (held -1, released +1)."""
    arr = np.asarray(arr, dtype=float)
    out = np.empty_like(arr)
    out[..., :2] = xy_to_net(arr[..., :2])
    out[..., 2] = 1.0 - 2.0 * arr[..., 2]
    return out


def enforce_release_monotone(m: np.ndarray) -> np.ndarray:
    """Once a step decodes as released, every later step in the chunk stays released."""
    held = np.asarray(m) >= 0.5
    return np.logical_and.accumulate(held, axis=-1).astype(float)


def decode_chunk(z) -> np.ndarray:
    """Network-space chunk back to clamped pixels with a thresholded button channel."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    xy = xy_from_net(z[..., :2])
    out[..., 0] = np.clip(xy[..., 0], 0.0, SCREEN_W)
    out[..., 1] = np.clip(xy[..., 1], 0.0, SCREEN_H)
    out[..., 2] = enforce_release_monotone(z[..., 2] < 0.0)
    return out


# Training space: the flow and diffusion heads model chunks relative to an
# anchor point, magnified so that typical chunk extents match unit noise.
CHUNK_SCALE = 12.0


def anchor(obs, state_net) -> np.ndarray:
    """``(B, 2)`` reference point in network space: the last executed point,
    or the observed cursor before any action (sentinel state)."""
    obs, state_net = np.asarray(obs, dtype=float), np.asarray(state_net, dtype=float)
    sentinel = np.all(state_net < -1.0, axis=-1, keepdims=True)
    return np.where(sentinel, obs[..., :2], state_net)


def to_training_space(z, anchor_net, scale: float = CHUNK_SCALE) -> np.ndarray:
    """Network-space chunk ``(B, H, 3)`` to anchor-relative, magnified xy; the button channel is unchanged."""
    z = np.array(z, dtype=float)
    z[..., :2] = (z[..., :2] - np.asarray(anchor_net)[:, None, :]) * scale
    return z


def from_training_space(z, anchor_net, scale: float = CHUNK_SCALE) -> np.ndarray:
    z = np.array(z, dtype=float)
    z[..., :2] = z[..., :2] / scale + np.asarray(anchor_net)[:, None, :]
    return z


def training_bounds(anchor_net, scale: float = CHUNK_SCALE) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample ``(B, 1, 3)`` lower and upper limits of the on-screen region in training space."""
    a = np.asarray(anchor_net, dtype=float)
    lo = np.concatenate([(-1.0 - a) * scale, -np.ones((len(a), 1))], axis=1)
    hi = np.concatenate([(1.0 - a) * scale, np.ones((len(a), 1))], axis=1)
    return lo[:, None, :], hi[:, None, :]
