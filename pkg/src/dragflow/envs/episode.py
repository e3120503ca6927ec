from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ActionPoint, ButtonState, Trajectory, resample_trajectory
from .goals import GoalRegion, goal_for_task, goal_satisfied
from .observation import observe
from .synthesis import synthesize_with_progress
from .tasks import TaskSpec, generate_task

RESAMPLED_LENGTH = 60


@dataclass(frozen=True, eq=False)
class Episode:
    """A stored task instance: task parameters, dense trajectory, per-waypoint observations and goal."""

    task: TaskSpec
    trajectory: Trajectory
    observations: np.ndarray
    goal: GoalRegion

    def __post_init__(self):
        obs = np.array(self.observations, dtype=float)
        if obs.ndim != 2 or len(obs) != len(self.trajectory):
            raise ValueError("need exactly one observation per waypoint")
        obs.setflags(write=False)
        object.__setattr__(self, "observations", obs)

    @property
    def id(self) -> str:
        return f"{self.task.domain.value}-{self.task.seed}"

    @property
    def domain(self):
        return self.task.domain

    @property
    def is_click(self) -> bool:
        return self.task.domain.is_click

    def __eq__(self, other):
        return (
            isinstance(other, Episode)
            and self.task == other.task
            and self.trajectory == other.trajectory
            and np.array_equal(self.observations, other.observations)
            and self.goal == other.goal
        )

    def reference_points(self, n: int = RESAMPLED_LENGTH) -> np.ndarray:
        """Waypoints the policy is trained to reproduce: the raw click, or the arc-length resampled drag."""
        if self.is_click:
            return self.trajectory.points.copy()
        return resample_trajectory(self.trajectory, n).points.copy()

    def resampled(self, n: int = RESAMPLED_LENGTH) -> Trajectory:
        return resample_trajectory(self.trajectory, n)

    def nearest_waypoint(self, xy) -> tuple[int, float]:
        """Index of the closest stored waypoint (lowest index on ties) and its distance."""
        d = np.sqrt(((self.trajectory.xy - np.asarray(xy, dtype=float)) ** 2).sum(-1))
        j = int(np.argmin(d))
        return j, float(d[j])


def make_episode(task: TaskSpec, density: int = 80, sigma: float = 0.0, raster: bool = False) -> Episode:
    traj, progress = synthesize_with_progress(task, density, sigma)
    obs = np.stack([
        observe(task, ActionPoint(float(x), float(y), ButtonState.from_flag(m)), s, raster)
        for (x, y, m), s in zip(traj.points, progress)
    ])
    return Episode(task, traj, obs, goal_for_task(task))


def generate_episode(domain, seed: int, density: int = 80, sigma: float = 0.0, raster: bool = False) -> Episode:
    return make_episode(generate_task(domain, seed), density, sigma, raster)


def verify_episode(ep: Episode) -> bool:
    """Replay the ground truth through the goal predicate."""
    pts = ep.trajectory.points
    if pts[-1, 2] != 0.0 or pts[0, 2] != 1.0:
        return False
    final = ActionPoint(float(pts[-1, 0]), float(pts[-1, 1]), ButtonState.UP)
    return goal_satisfied(ep.goal, final, ep.trajectory.xy)
