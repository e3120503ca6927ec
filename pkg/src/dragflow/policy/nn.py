"""Feed-forward networks and the Adam optimizer on top of the autograd tensors."""
from __future__ import annotations

import numpy as np

from .autograd import Tensor, concat, parameter

TIME_DIM = 8
_FREQS = np.pi * 2.0 ** np.arange(TIME_DIM // 2)


def time_embedding(t) -> np.ndarray:
    """Sinusoidal features of flow/diffusion time, shape ``(B, TIME_DIM)``."""
    t = np.asarray(t, dtype=float).reshape(-1, 1)
    return np.concatenate([np.sin(t * _FREQS), np.cos(t * _FREQS)], axis=1)


class MLP:
    """Dense network with SiLU hidden activations and a linear output."""

    def __init__(self, sizes: list[int], seed: int = 0, activation: str = "silu"):
        rng = np.random.default_rng(seed)
        self.sizes = list(sizes)
        self.activation = activation
        self.weights, self.biases = [], []
        for i, (n_in, n_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            scale = np.sqrt(1.0 / n_in)
            if i == len(sizes) - 2:
                scale *= 0.1
            self.weights.append(parameter(rng.normal(0.0, scale, size=(n_in, n_out))))
            self.biases.append(parameter(np.zeros(n_out)))

    def parameters(self) -> list[Tensor]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def parameter_names(self) -> list[str]:
        names = []
        for i in range(len(self.weights)):
            names += [f"layer{i}.weight", f"layer{i}.bias"]
        return names

    @property
    def n_params(self) -> int:
        return int(sum(p.data.size for p in self.parameters()))

    def _act(self, h: Tensor) -> Tensor:
        return h.silu() if self.activation == "silu" else h.tanh()

    def __call__(self, x) -> Tensor:
        h = x if isinstance(x, Tensor) else Tensor(x)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w + b
            if i < last:
                h = self._act(h)
        return h

    def predict(self, x: np.ndarray) -> np.ndarray:
        """Forward pass on plain arrays without building a graph."""
        h = np.asarray(x, dtype=float)
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            h = h @ w.data + b.data
            if i < last:
                h = h / (1.0 + np.exp(-h)) if self.activation == "silu" else np.tanh(h)
        return h

    def zero_grad(self):
        for p in self.parameters():
            p.grad = None

    def get_state(self) -> list[np.ndarray]:
        return [p.data.copy() for p in self.parameters()]

    def set_state(self, arrays: list[np.ndarray]):
        params = self.parameters()
        if len(arrays) != len(params):
            raise ValueError(f"expected {len(params)} tensors, got {len(arrays)}")
        for p, a in zip(params, arrays):
            a = np.asarray(a, dtype=float)
            if a.shape != p.data.shape:
                raise ValueError(f"shape mismatch {a.shape} vs {p.data.shape}")
            p.data = a.copy()


def conditioned_input(obs, state, x_flat, t) -> Tensor:
    """Concatenate observation, action state, flattened noisy chunk and time features."""
    pieces = [np.asarray(obs, dtype=float), np.asarray(state, dtype=float)]
    x = x_flat if isinstance(x_flat, Tensor) else Tensor(x_flat)
    return concat([Tensor(np.concatenate(pieces, axis=1)), x, Tensor(time_embedding(t))], axis=1)


class Adam:
    def __init__(self, params: list[Tensor], lr: float = 1e-4, betas=(0.9, 0.999), eps: float = 1e-8):
        self.params = params
        self.lr, self.b1, self.b2, self.eps = lr, betas[0], betas[1], eps
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]
        self.t = 0

    def step(self):
        self.t += 1
        c1 = 1.0 - self.b1 ** self.t
        c2 = 1.0 - self.b2 ** self.t
        for p, m, v in zip(self.params, self.m, self.v):
            if p.grad is None:
                continue
            m *= self.b1
            m += (1.0 - self.b1) * p.grad
            v *= self.b2
            v += (1.0 - self.b2) * p.grad ** 2
            p.data = p.data - self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
