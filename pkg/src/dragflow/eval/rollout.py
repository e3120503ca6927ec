"""Data-driven closed-loop environment and batched online rollouts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..core import SENTINEL, ActionPoint, ButtonState
from ..envs import RESAMPLED_LENGTH, Episode, goal_satisfied

EPSILON_MATCH = 20.0
SINGLE_SHOT_BUDGET = 3


def default_step_budget(exec_steps: int, length: int = RESAMPLED_LENGTH) -> int:
    return math.ceil(length / exec_steps) + 5


def episode_rng(seed: int, episode: Episode, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed), episode.domain.index, int(episode.task.seed) % 2**63, stream])


@dataclass
class RolloutTrace:
    episode_id: str
    success: bool
    reason: str
    steps: int
    executed: list = field(default_factory=list)
    matched: list = field(default_factory=list)

    def to_record(self) -> dict:
        return {
            "episode_id": self.episode_id, "success": self.success, "reason": self.reason, "steps": self.steps,
            "executed": [[float(x), float(y), int(m)] for x, y, m in self.executed],
            "matched": list(self.matched),
        }


class ClosedLoopEnv:
    """Replays stored observations for whichever recorded waypoint the policy's cursor lands near.

    After every executed action the nearest waypoint over the whole episode
    is looked up (lowest index on ties); within ``epsilon_match`` it becomes
    the matched state and its observation is served next, otherwise the
    previous observation stays. A press followed by a release ends the
    episode, scored by the goal predicate. With ``retry`` (single-shot
    baselines) a missed release does not end the episode and success means
    any release reached the goal.
    """

    def __init__(self, episode: Episode, step_budget: int, exec_steps: int = 1,
                 epsilon_match: float = EPSILON_MATCH, retry: bool = False):
        if step_budget < 1 or exec_steps < 1:
            raise ValueError("step_budget and exec_steps must be at least 1")
        self.episode = episode
        self.step_budget = step_budget
        self.exec_steps = exec_steps
        self.epsilon_match = epsilon_match
        self.retry = retry
        self.matched_index: int | None = None
        self.executed: list[tuple[float, float, float]] = []
        self.matched_log: list[int | None] = []
        self.steps = 0
        self.success = False
        self.released = False
        self._stroke: list[tuple[float, float]] | None = None

    @property
    def observation(self) -> np.ndarray:
        return self.episode.observations[0 if self.matched_index is None else self.matched_index]

    @property
    def state(self) -> np.ndarray:
        return np.array(self.executed[-1][:2]) if self.executed else np.array(SENTINEL)

    @property
    def done(self) -> bool:
        return self.success or (self.released and not self.retry) or self.steps >= self.step_budget

    def _execute(self, x: float, y: float, m: float):
        self.executed.append((float(x), float(y), float(m)))
        j, d = self.episode.nearest_waypoint((x, y))
        if d <= self.epsilon_match:
            self.matched_index = j
        self.matched_log.append(self.matched_index)
        if m == ButtonState.DOWN.flag:
            if self._stroke is None:
                self._stroke = []
            self._stroke.append((x, y))
        elif self._stroke is not None:
            self._stroke.append((x, y))
            release = ActionPoint(float(x), float(y), ButtonState.UP)
            self.success = goal_satisfied(self.episode.goal, release, np.array(self._stroke))
            self.released = True
            self._stroke = None

    def step(self, chunk: np.ndarray, n: int | None = None) -> bool:
        """Execute the first ``n`` actions of ``chunk`` (default ``exec_steps``); returns ``done``."""
        if self.done:
            raise RuntimeError("episode already finished")
        n = self.exec_steps if n is None else n
        self.steps += 1
        for x, y, m in np.asarray(chunk, dtype=float)[:n]:
            self._execute(x, y, m)
            if self.success or (self.released and not self.retry):
                break
        return self.done

    def trace(self) -> RolloutTrace:
        if self.success:
            reason = "goal reached"
        elif self.released:
            reason = "goal missed"
        else:
            reason = "no release"
        return RolloutTrace(self.episode.id, self.success, reason, self.steps,
                            list(self.executed), list(self.matched_log))


def online_eval(policy, episodes, exec_steps: int = 1, seed: int = 0, step_budget: int | None = None,
                epsilon_match: float = EPSILON_MATCH) -> list[RolloutTrace]:
    """Roll every episode out in lockstep, one batched policy call per interaction step."""
    episodes = list(episodes)
    single = getattr(policy, "single_shot", False)
    if single:
        budget = SINGLE_SHOT_BUDGET if step_budget is None else min(step_budget, SINGLE_SHOT_BUDGET)
    else:
        budget = default_step_budget(exec_steps) if step_budget is None else step_budget
    envs = [ClosedLoopEnv(ep, budget, exec_steps, epsilon_match, retry=single) for ep in episodes]
    rngs = [episode_rng(seed, ep) for ep in episodes]
    if hasattr(policy, "reset"):
        policy.reset()
    while True:
        live = [i for i, env in enumerate(envs) if not env.done]
        if not live:
            break
        eps = [episodes[i] for i in live]
        obs = np.stack([envs[i].observation for i in live])
        states = np.stack([envs[i].state for i in live])
        if single:
            ends = policy.endpoints(eps, obs, states)
            for k, i in enumerate(live):
                (sx, sy), (ex, ey) = ends[k]
                envs[i].step(np.array([[sx, sy, 1.0], [ex, ey, 0.0]]), n=2)
        else:
            chunks = policy.sample(eps, obs, states, [rngs[i] for i in live])
            for k, i in enumerate(live):
                envs[i].step(chunks[k])
    return [env.trace() for env in envs]


def online_rollout(policy, episode: Episode, exec_steps: int = 1, step_budget: int | None = None,
                   seed: int = 0, epsilon_match: float = EPSILON_MATCH) -> tuple[bool, RolloutTrace]:
    trace = online_eval(policy, [episode], exec_steps, seed, step_budget, epsilon_match)[0]
    return trace.success, trace
