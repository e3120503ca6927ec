"""Training configuration, model containers and the minibatch training loop."""
from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from enum import Enum

import numpy as np

from ..dataset import chunk_arrays
from ..envs import RESAMPLED_LENGTH
from .diffusion import NoisePredictor, denoise_chunks, diffusion_loss, draw_noise
from .discrete import EndpointClassifier, token_loss
from .encoding import anchor, encode_chunk, to_training_space, xy_to_net
from .flow import VelocityField, flow_loss, sample_chunks
from .nn import Adam

log = logging.getLogger(__name__)


class HeadMode(str, Enum):
    UNIFIED = "unified"
    SEPARATE = "separate"


class ModelKind(str, Enum):
    FLOW = "flow"
    DIFFUSION = "diffusion"
    DISCRETE = "discrete"


class NumericalError(RuntimeError):
    pass


LR_SCHEDULES = ("constant", "cosine")


def learning_rate(config: "TrainConfig", progress: float) -> float:
    """Step size at ``progress`` in [0, 1) of training."""
    if config.lr_schedule == "cosine":
        return config.lr * 0.5 * (1.0 + np.cos(np.pi * progress))
    return config.lr


@dataclass(frozen=True)
class TrainConfig:
    H: int = 20
    w_crit: float = 10.0
    lam: float = 0.1
    K: int = 10
    lr: float = 1e-3
    batch_size: int = 64
    epochs: int = 20
    head_mode: HeadMode = HeadMode.UNIFIED
    model_kind: ModelKind = ModelKind.FLOW
    seed: int = 0
    hidden: tuple = (256, 256)
    window_stride: int = 1
    diffusion_steps: int = 16
    state_jitter: float = 6.0
    lr_schedule: str = "constant"

    def __post_init__(self):
        object.__setattr__(self, "head_mode", HeadMode(self.head_mode))
        object.__setattr__(self, "model_kind", ModelKind(self.model_kind))
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if self.w_crit < 1:
            raise ValueError("w_crit must be at least 1")
        if self.lr_schedule not in LR_SCHEDULES:
            raise ValueError(f"lr_schedule must be one of {LR_SCHEDULES}")
        if self.state_jitter < 0:
            raise ValueError("state_jitter must be non-negative")
        if self.K < 1 or self.diffusion_steps < 1:
            raise ValueError("integration steps must be at least 1")
        if self.H < 1 or self.batch_size < 1 or self.epochs < 0 or self.window_stride < 1:
            raise ValueError("H, batch_size, window_stride must be positive and epochs non-negative")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["head_mode"] = self.head_mode.value
        d["model_kind"] = self.model_kind.value
        d["hidden"] = list(self.hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in known})

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)


class Model:
    """A trained policy: one network (unified) or a click and a drag network (separate)."""

    def __init__(self, config: TrainConfig, heads: dict, obs_dim: int):
        self.config = config
        self.heads = heads
        self.obs_dim = obs_dim

    @property
    def kind(self) -> ModelKind:
        return self.config.model_kind

    @property
    def H(self) -> int:
        return self.config.H

    @property
    def single_shot(self) -> bool:
        return self.kind is ModelKind.DISCRETE

    @property
    def n_params(self) -> int:
        return sum(h.n_params for h in self.heads.values())

    def head_for(self, episode) -> str:
        if self.config.head_mode is HeadMode.SEPARATE:
            return "click" if episode.is_click else "drag"
        return "unified"

    def _groups(self, episodes):
        groups: dict[str, list[int]] = {}
        for i, ep in enumerate(episodes):
            groups.setdefault(self.head_for(ep), []).append(i)
        return groups

    def sample(self, episodes, obs, states_px, rngs) -> np.ndarray:
        """Decoded pixel chunks ``(B, H, 3)``; each episode draws noise from its own generator."""
        obs, states_px = np.asarray(obs, dtype=float), np.asarray(states_px, dtype=float)
        H = self.H
        out = np.empty((len(episodes), H, 3))
        if self.kind is ModelKind.FLOW:
            noise = np.stack([rng.standard_normal((H, 3)) for rng in rngs])
            for name, idx in self._groups(episodes).items():
                out[idx] = sample_chunks(self.heads[name], obs[idx], states_px[idx], self.config.K, noise[idx])
        elif self.kind is ModelKind.DIFFUSION:
            N = self.config.diffusion_steps
            draws = [draw_noise(rng, H, N) for rng in rngs]
            init = np.stack([d[0] for d in draws])
            steps = np.stack([d[1] for d in draws], axis=1)
            for name, idx in self._groups(episodes).items():
                out[idx] = denoise_chunks(self.heads[name], obs[idx], states_px[idx], N, init[idx], steps[:, idx])
        else:
            raise TypeError("single-shot models predict endpoints, not chunks")
        return out

    def endpoints(self, episodes, obs, states_px) -> np.ndarray:
        """``(B, 2, 2)`` start/end predictions of a single-shot model."""
        obs, states_px = np.asarray(obs, dtype=float), np.asarray(states_px, dtype=float)
        out = np.empty((len(episodes), 2, 2))
        for name, idx in self._groups(episodes).items():
            out[idx] = self.heads[name].predict(obs[idx], states_px[idx])
        return out


def build_heads(config: TrainConfig, obs_dim: int) -> dict:
    names = ["click", "drag"] if config.head_mode is HeadMode.SEPARATE else ["unified"]
    heads = {}
    for i, name in enumerate(names):
        seed = config.seed * 1000 + i
        if config.model_kind is ModelKind.FLOW:
            heads[name] = VelocityField(obs_dim, config.H, config.hidden, seed=seed)
        elif config.model_kind is ModelKind.DIFFUSION:
            heads[name] = NoisePredictor(obs_dim, config.H, config.hidden, seed=seed)
        else:
            heads[name] = EndpointClassifier(obs_dim, config.hidden, seed=seed)
    return heads


@dataclass
class TrainResult:
    model: Model
    curve: list[float] = field(default_factory=list)


def _single_shot_arrays(episodes):
    obs = np.array([ep.observations[0] for ep in episodes])
    state = np.tile(np.array([-1.0, -1.0]), (len(episodes), 1))
    targets = np.array([np.concatenate([ep.trajectory.xy[0], ep.trajectory.xy[-1]]) for ep in episodes])
    return {"obs": obs, "state": state, "targets": targets,
            "is_click": np.array([ep.is_click for ep in episodes], dtype=bool)}


def _balance_clicks(data: dict, H: int, stride: int) -> dict:
    """Repeat click windows so clicks keep the click/drag mix of non-overlapping windows.

    Overlapping strides multiply a drag's window count by
    ``ceil(L / stride) / ceil(L / H)`` while a click episode gains at most one
    window, so each click episode's windows are repeated until the episode
    counts that many times.
    """
    ratio = math.ceil(RESAMPLED_LENGTH / stride) / math.ceil(RESAMPLED_LENGTH / H)
    if ratio <= 1 or not data["is_click"].any():
        return data
    per_episode = np.bincount(data["episode"])[data["episode"]]
    reps = np.where(data["is_click"], np.maximum(1, np.rint(ratio / per_episode)), 1).astype(int)
    return {k: np.repeat(v, reps, axis=0) for k, v in data.items()}


def _jittered_states(config: TrainConfig, state_px, rng):
    """Perturb executed states (never the sentinel); the target chunk is left
    unchanged, so the network learns to steer back onto the demonstrated path."""
    if config.state_jitter <= 0:
        return state_px
    live = np.all(state_px >= 0.0, axis=1, keepdims=True)
    return np.where(live, state_px + rng.normal(0.0, config.state_jitter, state_px.shape), state_px)


def _batch_loss(config: TrainConfig, head, data, idx, rng):
    if config.model_kind is ModelKind.DISCRETE:
        return token_loss(head, data["obs"][idx], data["state"][idx], data["targets"][idx])
    obs = data["obs"][idx]
    state = xy_to_net(_jittered_states(config, data["state"][idx], rng))
    clean = to_training_space(data["net_chunk"][idx], anchor(obs, state))
    noise = rng.standard_normal(clean.shape)
    t = rng.uniform(0.0, 1.0, size=len(idx))
    if config.model_kind is ModelKind.FLOW:
        return flow_loss(head, obs, state, clean, data["weights"][idx], noise, t, config.lam)
    return diffusion_loss(head, obs, state, clean, noise, t)


def train(episodes, config: TrainConfig, on_epoch=None) -> TrainResult:
    """Minibatch Adam over chunk windows (or endpoint pairs for the single-shot baseline).

    Each batch draws fresh noise and flow/diffusion times. Raises
    ``NumericalError`` naming the epoch and batch when the loss goes non-finite.
    """
    episodes = list(episodes)
    if not episodes:
        raise ValueError("no training episodes")
    obs_dim = episodes[0].observations.shape[1]
    if config.model_kind is ModelKind.DISCRETE:
        data = _single_shot_arrays(episodes)
    else:
        data = chunk_arrays(episodes, config.H, config.w_crit, config.window_stride)
        data = _balance_clicks(data, config.H, config.window_stride)
        data["net_chunk"] = encode_chunk(data["chunk"])
    heads = build_heads(config, obs_dim)
    if config.head_mode is HeadMode.SEPARATE:
        members = {"click": np.flatnonzero(data["is_click"]), "drag": np.flatnonzero(~data["is_click"])}
    else:
        members = {"unified": np.arange(len(data["obs"]))}
    optims = {name: Adam(heads[name].parameters(), lr=config.lr) for name in heads}
    rng = np.random.default_rng([config.seed, 7])
    curve = []
    n_batches = sum(-(-len(m) // config.batch_size) for m in members.values())
    total_steps = max(config.epochs * n_batches, 1)
    step = 0
    for epoch in range(config.epochs):
        batches = []
        for name in heads:
            order = rng.permutation(members[name])
            batches += [(name, order[i:i + config.batch_size]) for i in range(0, len(order), config.batch_size)]
        batches = [batches[i] for i in rng.permutation(len(batches))] if len(heads) > 1 else batches
        total, count = 0.0, 0
        for b, (name, idx) in enumerate(batches):
            loss, grads = _batch_loss(config, heads[name], data, idx, rng)
            if not np.isfinite(loss):
                raise NumericalError(f"non-finite loss {loss} at epoch {epoch} batch {b} (head {name})")
            for p, g in zip(heads[name].parameters(), grads):
                p.grad = g
            optims[name].lr = learning_rate(config, step / total_steps)
            optims[name].step()
            step += 1
            total += loss * len(idx)
            count += len(idx)
        curve.append(total / max(count, 1))
        log.info("epoch %d loss %.6f", epoch, curve[-1])
        if on_epoch is not None:
            on_epoch(epoch, curve[-1])
    return TrainResult(Model(config, heads, obs_dim), curve)
