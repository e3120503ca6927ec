"""Trajectory error and accuracy metrics, always in pixels."""
from __future__ import annotations

import numpy as np

from ..core import Trajectory

TEA_EPSILON = 20.0


def _xy(t) -> np.ndarray:
    if isinstance(t, Trajectory):
        return t.xy
    a = np.asarray(t, dtype=float)
    if a.ndim != 2 or a.shape[1] < 2:
        raise ValueError(f"expected a (T, 2+) array, got shape {a.shape}")
    return a[:, :2]


def _aligned(pred, gt) -> np.ndarray:
    p, g = _xy(pred), _xy(gt)
    if len(p) != len(g):
        raise ValueError(f"length mismatch: {len(p)} predicted vs {len(g)} ground-truth points")
    if len(p) == 0:
        raise ValueError("empty trajectories")
    return np.sqrt(((p - g) ** 2).sum(-1))


def ate(pred, gt) -> float:
    """Mean Euclidean distance between aligned waypoints."""
    return float(_aligned(pred, gt).mean())


def tea(pred, gt, epsilon: float = TEA_EPSILON) -> float:
    """Fraction of aligned waypoints within ``epsilon`` of their ground-truth counterpart."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return float((_aligned(pred, gt) <= epsilon).mean())


def tea_endpoint(pred, gt, epsilon: float = TEA_EPSILON) -> float:
    """1.0 when the final waypoint lands within ``epsilon`` of the ground-truth final waypoint."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    return float(_aligned(pred, gt)[-1] <= epsilon)
