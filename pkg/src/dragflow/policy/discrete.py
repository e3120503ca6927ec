"""Single-shot baseline: per-axis 256-way classification of drag start and end points."""
from __future__ import annotations

import numpy as np

from ..core import SCREEN_H, SCREEN_W, ActionPoint, ButtonState
from .autograd import Tensor
from .encoding import xy_to_net
from .nn import MLP

N_BINS = 256
AXES = 4  # start x, start y, end x, end y
_EXTENT = np.array([SCREEN_W, SCREEN_H, SCREEN_W, SCREEN_H])


def bin_width(axis: int) -> float:
    return float(_EXTENT[axis] / N_BINS)


def to_bins(coords) -> np.ndarray:
    """``(B, 4)`` pixel coordinates to bin indices."""
    coords = np.asarray(coords, dtype=float)
    idx = np.floor(coords / _EXTENT * N_BINS).astype(int)
    return np.clip(idx, 0, N_BINS - 1)


def bin_centers(idx) -> np.ndarray:
    return (np.asarray(idx) + 0.5) * (_EXTENT / N_BINS)


class EndpointClassifier:
    def __init__(self, obs_dim: int, hidden=(256, 256), seed: int = 0):
        self.obs_dim, self.hidden = obs_dim, tuple(hidden)
        self.net = MLP([obs_dim + 2, *hidden, AXES * N_BINS], seed=seed)

    def parameters(self):
        return self.net.parameters()

    @property
    def n_params(self) -> int:
        return self.net.n_params

    def logits(self, obs, state_px) -> np.ndarray:
        inp = np.concatenate([np.asarray(obs, dtype=float), xy_to_net(state_px)], axis=1)
        return self.net.predict(inp).reshape(-1, AXES, N_BINS)

    def predict(self, obs, state_px) -> np.ndarray:
        """``(B, 2, 2)`` start/end points at the argmax bin centres (lowest bin wins ties)."""
        idx = np.argmax(self.logits(obs, state_px), axis=-1)
        return bin_centers(idx).reshape(-1, 2, 2)


def token_loss(model: EndpointClassifier, obs, state_px, targets_px):
    """Mean per-axis cross entropy and gradients."""
    labels = to_bins(targets_px)
    inp = np.concatenate([np.asarray(obs, dtype=float), xy_to_net(state_px)], axis=1)
    for p in model.parameters():
        p.grad = None
    B = len(labels)
    logp = model.net(Tensor(inp)).reshape(B, AXES, N_BINS).log_softmax(-1)
    onehot = np.zeros((B, AXES, N_BINS))
    np.put_along_axis(onehot, labels[..., None], 1.0, axis=-1)
    loss = -(logp * onehot).sum() * (1.0 / (B * AXES))
    loss.backward()
    return float(loss.data), [np.zeros_like(p.data) if p.grad is None else p.grad for p in model.parameters()]


def predict_single_shot(model: EndpointClassifier, obs, state_px) -> tuple[ActionPoint, ActionPoint]:
    pts = model.predict(np.asarray(obs, dtype=float)[None], np.asarray(state_px, dtype=float)[None])[0]
    return (ActionPoint(float(pts[0, 0]), float(pts[0, 1]), ButtonState.DOWN),
            ActionPoint(float(pts[1, 0]), float(pts[1, 1]), ButtonState.UP))
