"""Synthetic drag environments: task proposal, trajectory synthesis, observation, goals."""
from .episode import RESAMPLED_LENGTH, Episode, generate_episode, make_episode, verify_episode
from .goals import GoalKind, GoalRegion, goal_for_task, goal_satisfied, stroke_coverage
from .observation import OBS_WIDTH, obs_width, observe
from .synthesis import path_points, synthesize_trajectory, synthesize_with_progress
from .tasks import (
    CURVED_DOMAINS,
    DRAG_DOMAINS,
    Domain,
    TaskParamError,
    TaskSpec,
    generate_task,
    parse_domain,
    validate_task,
)

__all__ = [
    "CURVED_DOMAINS", "DRAG_DOMAINS", "Domain", "Episode", "GoalKind", "GoalRegion", "OBS_WIDTH",
    "RESAMPLED_LENGTH", "TaskParamError", "TaskSpec", "generate_episode", "generate_task", "goal_for_task",
    "goal_satisfied", "make_episode", "obs_width", "observe", "parse_domain", "path_points", "stroke_coverage",
    "synthesize_trajectory", "synthesize_with_progress", "validate_task", "verify_episode",
]
