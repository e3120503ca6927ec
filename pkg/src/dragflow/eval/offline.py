"""Open-loop scoring: every window starts from the ground-truth observation and action state."""
from __future__ import annotations

import numpy as np

from ..core import SENTINEL
from .metrics import TEA_EPSILON, ate, tea, tea_endpoint
from .rollout import episode_rng

BATCH = 1024


def _window_inputs(ep, ref, s):
    if s == 0:
        return ep.observations[0], np.array(SENTINEL)
    state = ref[s - 1, :2]
    return ep.observations[ep.nearest_waypoint(state)[0]], state.copy()


def offline_predictions(policy, episodes, exec_steps: int = 1, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """``(predicted, ground truth)`` point arrays per episode.

    Chunk policies are queried at every ``exec_steps``-th reference waypoint
    and the first ``exec_steps`` predicted actions of each window are
    concatenated. Single-shot policies are scored on their start and end
    points only. Each window draws noise from its own generator, so the
    result does not depend on evaluation order.
    """
    episodes = list(episodes)
    if exec_steps < 1:
        raise ValueError("exec_steps must be at least 1")
    refs = [ep.reference_points() for ep in episodes]
    if getattr(policy, "single_shot", False):
        obs = np.stack([ep.observations[0] for ep in episodes])
        states = np.tile(np.array(SENTINEL), (len(episodes), 1))
        ends = policy.endpoints(episodes, obs, states)
        return [(np.column_stack([ends[i], [1.0, 0.0]]), ref[[0, -1]]) for i, ref in enumerate(refs)]

    jobs = []
    for i, (ep, ref) in enumerate(zip(episodes, refs)):
        for s in range(0, len(ref), exec_steps):
            jobs.append((i, s))
    preds = [np.empty_like(ref) for ref in refs]
    if hasattr(policy, "reset"):
        policy.reset()
    for lo in range(0, len(jobs), BATCH):
        batch = jobs[lo:lo + BATCH]
        eps = [episodes[i] for i, _ in batch]
        inputs = [_window_inputs(episodes[i], refs[i], s) for i, s in batch]
        obs = np.stack([o for o, _ in inputs])
        states = np.stack([st for _, st in inputs])
        rngs = [episode_rng(seed, episodes[i], 1 + s) for i, s in batch]
        chunks = policy.sample(eps, obs, states, rngs)
        for (i, s), chunk in zip(batch, chunks):
            k = min(exec_steps, len(refs[i]) - s)
            preds[i][s:s + k] = chunk[:k]
    return list(zip(preds, refs))


def score_offline(pairs, epsilon: float = TEA_EPSILON) -> list[dict]:
    return [{"ate": ate(p, g), "tea": tea(p, g, epsilon), "tea_endpoint": tea_endpoint(p, g, epsilon)}
            for p, g in pairs]
