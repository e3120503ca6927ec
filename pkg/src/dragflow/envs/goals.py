"""Goal acceptance regions and the release-time success predicate."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..core import ActionPoint
from .synthesis import bezier_chain, path_endpoints
from .tasks import Domain, TaskSpec

GOAL_RADIUS = 20.0
ANGLE_TOLERANCE = 5.0
COVERAGE_THRESHOLD = 0.8
COVERAGE_RADIUS = 15.0


class GoalKind(Enum):
    ENDPOINT_DISC = "endpoint_disc"
    ANGLE_TOLERANCE = "angle_tolerance"
    BOX_CONTAINMENT = "box_containment"
    STROKE_COVERAGE = "stroke_coverage"


@dataclass(frozen=True)
class GoalRegion:
    kind: GoalKind
    params: dict[str, Any] = field(hash=False)

    def to_record(self) -> dict:
        return {"kind": self.kind.value, "params": self.params}

    @classmethod
    def from_record(cls, rec: dict) -> "GoalRegion":
        return cls(GoalKind(rec["kind"]), rec["params"])


def goal_for_task(task: TaskSpec) -> GoalRegion:
    p, d = task.params, task.domain
    if d is Domain.ROTATE:
        return GoalRegion(GoalKind.ANGLE_TOLERANCE, {
            "center": [p["center_x"], p["center_y"]], "target_angle": p["target_angle"], "tolerance": ANGLE_TOLERANCE})
    if d is Domain.DRAG_TO_TARGET:
        hw, hh = p["dst_w"] / 2, p["dst_h"] / 2
        return GoalRegion(GoalKind.BOX_CONTAINMENT, {
            "box": [p["dst_x"] - hw, p["dst_y"] - hh, p["dst_x"] + hw, p["dst_y"] + hh]})
    if d is Domain.HANDWRITING:
        return GoalRegion(GoalKind.STROKE_COVERAGE, {
            "control_points": p["control_points"], "threshold": COVERAGE_THRESHOLD, "radius": COVERAGE_RADIUS})
    _, end = path_endpoints(task)
    return GoalRegion(GoalKind.ENDPOINT_DISC, {"center": end.tolist(), "radius": GOAL_RADIUS})


def clockwise_angle(center, point) -> float:
    """Degrees clockwise from straight up, in (-180, 180]."""
    return math.degrees(math.atan2(point[0] - center[0], -(point[1] - center[1])))


def angle_gap(a: float, b: float) -> float:
    return abs((a - b + 180.0) % 360.0 - 180.0)


def point_segment_distances(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Distance from each point to the nearest segment of ``poly``."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    poly = np.asarray(poly, dtype=float).reshape(-1, 2)
    if len(poly) == 1:
        return np.sqrt(((points - poly[0]) ** 2).sum(-1))
    a, b = poly[:-1], poly[1:]
    ab = b - a
    denom = (ab ** 2).sum(-1)
    ap = points[:, None, :] - a[None]
    t = np.divide((ap * ab[None]).sum(-1), denom[None], out=np.zeros(ap.shape[:2]), where=denom[None] > 0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None] + t[..., None] * ab[None]
    return np.sqrt(((points[:, None, :] - closest) ** 2).sum(-1)).min(axis=1)


def stroke_coverage(control_points, drawn, radius: float = COVERAGE_RADIUS, samples: int = 256) -> float:
    """Fraction of the glyph's arc length lying within ``radius`` of the drawn polyline."""
    dense = bezier_chain(control_points)
    cum = np.concatenate([[0.0], np.cumsum(np.sqrt((np.diff(dense, axis=0) ** 2).sum(-1)))])
    s = np.linspace(0.0, cum[-1], samples)
    probe = np.stack([np.interp(s, cum, dense[:, 0]), np.interp(s, cum, dense[:, 1])], axis=-1)
    return float((point_segment_distances(probe, drawn) <= radius).mean())


def goal_satisfied(goal: GoalRegion, final: ActionPoint, final_state=None) -> bool:
    """Whether releasing at ``final`` completes the task.

    ``final_state`` is the drawn polyline (``(k, 2)`` array) and only matters
    for stroke coverage; without it the release point alone is used.
    """
    p = goal.params
    if goal.kind is GoalKind.ENDPOINT_DISC:
        return math.hypot(final.x - p["center"][0], final.y - p["center"][1]) <= p["radius"]
    if goal.kind is GoalKind.ANGLE_TOLERANCE:
        achieved = clockwise_angle(p["center"], (final.x, final.y))
        return angle_gap(achieved, p["target_angle"]) <= p["tolerance"]
    if goal.kind is GoalKind.BOX_CONTAINMENT:
        x0, y0, x1, y1 = p["box"]
        return x0 <= final.x <= x1 and y0 <= final.y <= y1
    if goal.kind is GoalKind.STROKE_COVERAGE:
        drawn = np.array([[final.x, final.y]]) if final_state is None else np.asarray(final_state, dtype=float)
        return stroke_coverage(p["control_points"], drawn, p["radius"]) >= p["threshold"]
    raise ValueError(f"unknown goal kind {goal.kind}")
