"""Flow-matching action head: velocity field, training objective, Euler sampler."""
from __future__ import annotations

import numpy as np

from ..core import ActionChunk
from .autograd import Tensor
from .encoding import anchor, decode_chunk, from_training_space, xy_to_net
from .nn import MLP, TIME_DIM, conditioned_input, time_embedding


class VelocityField:
    """``v(noisy chunk, tau | observation, action state)`` as a feed-forward network.

    Inputs are concatenated as ``[obs (F), state (2), chunk (3H), time (8)]``;
    the output is one velocity per chunk coordinate.
    """

    def __init__(self, obs_dim: int, H: int, hidden=(256, 256), seed: int = 0, activation: str = "silu"):
        self.obs_dim, self.H, self.hidden = obs_dim, H, tuple(hidden)
        self.net = MLP([obs_dim + 2 + 3 * H + TIME_DIM, *hidden, 3 * H], seed=seed, activation=activation)

    def parameters(self):
        return self.net.parameters()

    @property
    def n_params(self) -> int:
        return self.net.n_params

    def forward(self, x, tau, obs, state) -> Tensor:
        """Graph-building pass; ``x`` is ``(B, H, 3)`` in training space, ``state`` in network space."""
        B = np.shape(obs)[0]
        flat = x.reshape(B, 3 * self.H) if isinstance(x, Tensor) else np.asarray(x).reshape(B, 3 * self.H)
        return self.net(conditioned_input(obs, state, flat, tau)).reshape(B, self.H, 3)

    def velocity(self, x, tau, obs, state) -> np.ndarray:
        B = np.shape(obs)[0]
        inp = np.concatenate([obs, state, np.asarray(x).reshape(B, -1), _time(tau, B)], axis=1)
        return self.net.predict(inp).reshape(B, self.H, 3)


def _time(tau, B):
    return time_embedding(np.broadcast_to(np.asarray(tau, dtype=float), (B,)))


def _batched(*arrays):
    return [np.asarray(a, dtype=float) for a in arrays]


def directional_penalty(v: Tensor, u: np.ndarray) -> Tensor:
    """Per-step ``1 - cos`` between predicted and target xy velocities, shape ``(B, H)``.

    Steps where either vector has zero length contribute 0.
    """
    uxy = np.asarray(u, dtype=float)[:, :, :2]
    B, H = uxy.shape[:2]
    # the cosine is scale invariant, so both vectors are first divided by a
    # constant per-step scale (their largest component); squaring then cannot
    # underflow or overflow. u goes through the same operations as v, so
    # identical inputs give identical unit vectors.
    uscale = np.abs(uxy).max(-1)
    vscale = np.abs(v.data[:, :, :2]).max(-1)
    valid = ((uscale > 0) & (vscale > 0)).astype(float)
    us = uxy / np.where(uscale > 0, uscale, 1.0)[..., None]
    uhat = us / np.sqrt((us * us).sum(-1) + (1.0 - valid))[..., None]
    vs = v[:, :, 0:2] / np.where(vscale > 0, vscale, 1.0)[..., None]
    vhat = vs / ((vs * vs).sum(-1) + (1.0 - valid)).sqrt().reshape(B, H, 1)
    # 1 - cos of two unit vectors is half their squared distance, which stays
    # in [0, 2] under rounding
    diff = vhat - uhat
    return (diff * diff).sum(-1) * 0.5 * valid


def flow_objective(v: Tensor, u: np.ndarray, weights: np.ndarray, lam: float) -> Tensor:
    """Weighted velocity regression plus ``lam`` times the directional penalty, averaged over the batch."""
    sq = ((v - u) ** 2).sum(-1)
    weighted = (sq * weights).sum(-1) / weights.sum(-1)
    total = weighted
    if lam:
        total = total + directional_penalty(v, u).mean(-1) * lam
    return total.mean()


def flow_loss(field, obs, state, clean_chunk, weights, noise, tau, lam: float = 0.1):
    """Loss and parameter gradients for one batch.

    All inputs are already in training space (state in network space); ``clean_chunk`` and ``noise``
    are ``(B, H, 3)``, ``weights`` ``(B, H)``, ``tau`` ``(B,)``. Single
    samples without the batch axis are accepted too.
    """
    clean, noise, weights = _batched(clean_chunk, noise, weights)
    obs, state = _batched(obs, state)
    if clean.ndim == 2:
        clean, noise, weights = clean[None], noise[None], weights[None]
        obs, state = obs[None], state[None]
    tau = np.asarray(tau, dtype=float).reshape(-1)
    if tau.size == 1 and len(clean) > 1:
        tau = np.repeat(tau, len(clean))
    t = tau[:, None, None]
    interp = t * clean + (1.0 - t) * noise
    target = clean - noise
    for p in field.parameters():
        p.grad = None
    v = field.forward(interp, tau, obs, state)
    loss = flow_objective(v, target, weights, lam)
    loss.backward()
    grads = [np.zeros_like(p.data) if p.grad is None else p.grad for p in field.parameters()]
    return float(loss.data), grads


def integrate(field, noise, obs, state, K: int) -> np.ndarray:
    """Euler integration of the field from tau=0 to tau=1 in ``K`` equal steps."""
    if K < 1:
        raise ValueError("K must be at least 1")
    x = np.array(noise, dtype=float)
    dt = 1.0 / K
    for k in range(K):
        x = x + dt * field.velocity(x, k * dt, obs, state)
    return x


def sample_chunks(field, obs, state_px, K: int, noise) -> np.ndarray:
    """Batched sampling; returns decoded pixel chunks ``(B, H, 3)``."""
    obs = np.asarray(obs, dtype=float)
    state = xy_to_net(state_px)
    raw = integrate(field, noise, obs, state, K)
    return decode_chunk(from_training_space(raw, anchor(obs, state)))


def sample_chunk(field, obs, state_px, K: int = 10, seed: int = 0) -> ActionChunk:
    """Draw one chunk from seeded standard-normal noise."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((1, field.H, 3))
    out = sample_chunks(field, np.asarray(obs, dtype=float)[None], np.asarray(state_px, dtype=float)[None], K, noise)
    return ActionChunk(out[0])
