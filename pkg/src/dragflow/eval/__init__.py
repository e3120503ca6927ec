"""Offline and closed-loop evaluation protocols and the ablation runner."""
from .metrics import TEA_EPSILON, ate, tea, tea_endpoint
from .offline import offline_predictions, score_offline
from .report import EvalReport, aggregate, evaluate
from .rollout import (
    EPSILON_MATCH,
    SINGLE_SHOT_BUDGET,
    ClosedLoopEnv,
    RolloutTrace,
    default_step_budget,
    episode_rng,
    online_eval,
    online_rollout,
)
from .ablation import AblationTable, Axis, Cell, CellResult, grid, run_ablation
