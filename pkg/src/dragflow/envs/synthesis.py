"""Ground-truth drag paths with ease-in-ease-out timing."""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..core import DOWN, FRAME_RATE, SCREEN_H, SCREEN_W, UP, Trajectory
from .tasks import Domain, TaskSpec, task_rng, validate_task

MIN_DENSITY = 50


def rotation_point(cx: float, cy: float, r: float, angle_deg) -> np.ndarray:
    """Handle position at ``angle_deg`` clockwise from straight up (screen y points down)."""
    a = np.radians(angle_deg)
    return np.stack([cx + r * np.sin(a), cy - r * np.cos(a)], axis=-1)


def bezier_chain(ctrl, samples_per_curve: int = 400) -> np.ndarray:
    """Dense polyline through chained cubic Bezier segments."""
    ctrl = np.asarray(ctrl, dtype=float)
    t = np.linspace(0.0, 1.0, samples_per_curve)[:, None]
    pieces = []
    for k in range(0, len(ctrl) - 1, 3):
        p0, p1, p2, p3 = ctrl[k:k + 4]
        seg = (1 - t) ** 3 * p0 + 3 * (1 - t) ** 2 * t * p1 + 3 * (1 - t) * t ** 2 * p2 + t ** 3 * p3
        pieces.append(seg if not pieces else seg[1:])
    return np.vstack(pieces)


@lru_cache(maxsize=4096)
def _glyph_table(ctrl_key: tuple) -> tuple[np.ndarray, np.ndarray]:
    dense = bezier_chain(np.array(ctrl_key).reshape(-1, 2))
    cum = np.concatenate([[0.0], np.cumsum(np.sqrt((np.diff(dense, axis=0) ** 2).sum(-1)))])
    return dense, cum / cum[-1]


def glyph_polyline(task: TaskSpec) -> np.ndarray:
    ctrl = tuple(np.asarray(task.params["control_points"], dtype=float).ravel().tolist())
    return _glyph_table(ctrl)[0]


def path_points(task: TaskSpec, u) -> np.ndarray:
    """Points at arc-length fractions ``u`` along the task's geometric path."""
    u = np.asarray(u, dtype=float)
    p, d = task.params, task.domain
    if d is Domain.ROTATE:
        return rotation_point(p["center_x"], p["center_y"], p["radius"], u * p["target_angle"])
    if d is Domain.HANDWRITING:
        dense, frac = _glyph_table(tuple(np.asarray(p["control_points"], dtype=float).ravel().tolist()))
        return np.stack([np.interp(u, frac, dense[:, 0]), np.interp(u, frac, dense[:, 1])], axis=-1)
    start, end = path_endpoints(task)
    return start + u[..., None] * (end - start)


def path_endpoints(task: TaskSpec) -> tuple[np.ndarray, np.ndarray]:
    p, d = task.params, task.domain
    if d is Domain.SLIDER_CAPTCHA:
        return np.array([p["knob_x"], p["knob_y"]]), np.array([p["gap_x"], p["knob_y"]])
    if d is Domain.DRAG_TO_TARGET:
        return np.array([p["src_x"], p["src_y"]]), np.array([p["dst_x"], p["dst_y"]])
    if d is Domain.RESIZE_HANDLE:
        w, h = p["x1"] - p["x0"], p["y1"] - p["y0"]
        if p["handle"] == "corner":
            return np.array([p["x1"], p["y1"]]), np.array([p["x0"] + p["scale"] * w, p["y0"] + p["scale"] * h])
        ym = 0.5 * (p["y0"] + p["y1"])
        return np.array([p["x1"], ym]), np.array([p["x0"] + p["scale"] * w, ym])
    if d is Domain.CLICK:
        pt = np.array([p["x"], p["y"]])
        return pt, pt.copy()
    pts = path_points(task, np.array([0.0, 1.0]))
    return pts[0], pts[1]


def min_jerk_profile(n: int) -> np.ndarray:
    tau = np.linspace(0.0, 1.0, n)
    return tau ** 3 * (10 - 15 * tau + 6 * tau ** 2)


def synthesize_with_progress(task: TaskSpec, density: int = 80, sigma: float = 0.0) -> tuple[Trajectory, np.ndarray]:
    """Trajectory plus the path fraction completed at each waypoint."""
    validate_task(task)
    if task.domain is Domain.CLICK:
        start, _ = path_endpoints(task)
        pts = np.array([[start[0], start[1], DOWN], [start[0], start[1], UP]])
        return Trajectory(pts, np.array([0.0, 1.0 / FRAME_RATE])), np.array([0.0, 1.0])
    if density < MIN_DENSITY:
        raise ValueError(f"density must be at least {MIN_DENSITY}, got {density}")
    progress = min_jerk_profile(density)
    xy = path_points(task, progress)
    if sigma > 0:
        rng = task_rng(task.domain, task.seed, stream=1)
        xy[1:-1] += rng.normal(0.0, sigma, size=(density - 2, 2))
        xy[:, 0] = np.clip(xy[:, 0], 0.0, SCREEN_W)
        xy[:, 1] = np.clip(xy[:, 1], 0.0, SCREEN_H)
    pts = np.empty((density, 3))
    pts[:, :2] = xy
    pts[:, 2] = DOWN
    pts[-1, 2] = UP
    return Trajectory(pts, np.arange(density) / FRAME_RATE), progress


def synthesize_trajectory(task: TaskSpec, density: int = 80, sigma: float = 0.0) -> Trajectory:
    return synthesize_with_progress(task, density, sigma)[0]
