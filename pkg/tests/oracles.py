"""Independent reference implementations used as test oracles."""
import math

import numpy as np

from dragflow.policy import VelocityField, flow_loss


def brute_ate(pred, gt):
    total = 0.0
    for (px, py), (gx, gy) in zip(pred, gt):
        total += math.sqrt((px - gx) ** 2 + (py - gy) ** 2)
    return total / len(gt)


def brute_tea(pred, gt, eps):
    hits = 0
    for (px, py), (gx, gy) in zip(pred, gt):
        if math.sqrt((px - gx) ** 2 + (py - gy) ** 2) <= eps:
            hits += 1
    return hits / len(gt)


def gradcheck_instance(seed: int, h: float = 1e-4) -> float:
    """Max relative error between analytic and central-difference gradients
    of the full flow objective for one random small network and batch.

    The error of each parameter tensor is ``|a - n| / max(|a|, |n|)`` in the
    Euclidean norm, which keeps isolated near-zero entries (where central
    differences are dominated by round-off) from swamping the comparison.

    Weights are redrawn at unit scale (N(0, 0.5)) so that every parameter
    carries a gradient well above finite-difference round-off.
    """
    rng = np.random.default_rng(seed)
    obs_dim, H, B = int(rng.integers(2, 6)), int(rng.integers(1, 5)), int(rng.integers(1, 4))
    hidden = tuple(int(k) for k in rng.integers(3, 9, size=int(rng.integers(1, 3))))
    field = VelocityField(obs_dim, H, hidden, seed=seed, activation=str(rng.choice(["silu", "tanh"])))
    for p in field.parameters():
        p.data = rng.normal(0.0, 0.5, size=p.data.shape)
    obs = rng.normal(size=(B, obs_dim))
    state = rng.uniform(-1, 1, size=(B, 2))
    clean = rng.normal(size=(B, H, 3))
    noise = rng.normal(size=(B, H, 3))
    weights = np.where(rng.random((B, H)) < 0.3, float(rng.uniform(1, 15)), 1.0)
    tau = rng.uniform(0, 1, size=B)
    lam = float(rng.choice([0.0, 0.1, rng.uniform(0, 1)]))

    def loss():
        return flow_loss(field, obs, state, clean, weights, noise, tau, lam)[0]

    _, grads = flow_loss(field, obs, state, clean, weights, noise, tau, lam)
    worst = 0.0
    for p, g in zip(field.parameters(), grads):
        flat = p.data.reshape(-1)
        num = np.empty_like(flat)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + h
            up = loss()
            flat[i] = old - h
            down = loss()
            flat[i] = old
            num[i] = (up - down) / (2 * h)
        a = g.reshape(-1)
        scale = max(np.linalg.norm(a), np.linalg.norm(num))
        worst = max(worst, float(np.linalg.norm(a - num) / scale) if scale > 0 else 0.0)
    return worst


class ConstantField:
    """Velocity independent of position and time."""

    def __init__(self, c):
        self.c = np.asarray(c, dtype=float)
        self.H = self.c.shape[0]

    def velocity(self, x, tau, obs, state):
        return np.broadcast_to(self.c, np.shape(x)).copy()


class AffineField:
    """Velocity ``a x + b``, whose unit-time flow is ``e^a x0 + b (e^a - 1) / a``."""

    def __init__(self, a, b, H):
        self.a, self.b, self.H = a, b, H

    def velocity(self, x, tau, obs, state):
        return self.a * x + self.b
