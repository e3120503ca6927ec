"""Structured observation vectors standing in for screenshots.

Layout (width ``OBS_WIDTH``, zero padded per domain)::

    0:2    cursor x, y in [-1, 1]
    2      button held (1) or released (0)
    3:5    action state: last executed point, sentinel maps just outside [-1, 1]
    5:11   domain one-hot
    11:23  domain slots (visible element geometry and instruction parameters)
    23:    optional 32x18 stroke occupancy raster
"""
from __future__ import annotations

import numpy as np

from ..core import SCREEN_H, SCREEN_W, ActionPoint, ButtonState
from .synthesis import path_endpoints, path_points, rotation_point
from .tasks import GLYPH_NAMES, Domain, TaskSpec

N_DOMAINS = len(Domain)
DOMAIN_OFFSET = 5
SLOT_OFFSET = DOMAIN_OFFSET + N_DOMAINS
N_SLOTS = 12
OBS_WIDTH = SLOT_OFFSET + N_SLOTS
RASTER_SHAPE = (18, 32)
RASTER_WIDTH = RASTER_SHAPE[0] * RASTER_SHAPE[1]


def obs_width(raster: bool = False) -> int:
    return OBS_WIDTH + (RASTER_WIDTH if raster else 0)


def nx(x):
    return 2.0 * np.asarray(x, dtype=float) / SCREEN_W - 1.0


def ny(y):
    return 2.0 * np.asarray(y, dtype=float) / SCREEN_H - 1.0


def _slots(task: TaskSpec, cursor: ActionPoint, progress: float) -> list[float]:
    p, d = task.params, task.domain
    if d is Domain.SLIDER_CAPTCHA:
        knob = p["knob_x"] + progress * (p["gap_x"] - p["knob_x"])
        return [nx(knob), ny(p["knob_y"]), nx(p["gap_x"]), ny(p["gap_y"]), nx(p["knob_x"])]
    if d is Domain.ROTATE:
        angle = progress * p["target_angle"]
        hx, hy = rotation_point(p["center_x"], p["center_y"], p["radius"], angle)
        a = np.radians(angle)
        return [nx(p["center_x"]), ny(p["center_y"]), p["radius"] / SCREEN_W, np.sin(a), np.cos(a),
                p["target_angle"] / 90.0, nx(hx), ny(hy)]
    if d is Domain.DRAG_TO_TARGET:
        if cursor.m is ButtonState.DOWN and not cursor.is_sentinel:
            ix, iy = cursor.x, cursor.y
        elif progress >= 1.0:
            ix, iy = p["dst_x"], p["dst_y"]
        else:
            ix, iy = p["src_x"], p["src_y"]
        return [nx(ix), ny(iy), p["icon_size"] / SCREEN_W, nx(p["dst_x"]), ny(p["dst_y"]),
                p["dst_w"] / SCREEN_W, p["dst_h"] / SCREEN_H, nx(p["src_x"]), ny(p["src_y"])]
    if d is Domain.RESIZE_HANDLE:
        start, end = path_endpoints(task)
        hx, hy = start + progress * (end - start)
        x1, y1 = hx, (hy if p["handle"] == "corner" else p["y1"])
        return [nx(p["x0"]), ny(p["y0"]), nx(x1), ny(y1), p["scale"], nx(p["x1"]), ny(p["y1"]),
                1.0 if p["handle"] == "corner" else 0.0]
    if d is Domain.HANDWRITING:
        onehot = [0.0] * len(GLYPH_NAMES)
        onehot[GLYPH_NAMES.index(p["glyph"])] = 1.0
        return onehot + [nx(p["origin_x"]), ny(p["origin_y"]), p["width"] / SCREEN_W, p["height"] / SCREEN_H, progress]
    if d is Domain.CLICK:
        return [nx(p["x"]), ny(p["y"]), p["width"] / SCREEN_W, p["height"] / SCREEN_H]
    raise ValueError(f"no observation layout for {d}")


def stroke_raster(task: TaskSpec, progress: float) -> np.ndarray:
    grid = np.zeros(RASTER_SHAPE)
    if task.domain is Domain.HANDWRITING and progress > 0:
        pts = path_points(task, np.linspace(0.0, progress, 256))
        cols = np.clip((pts[:, 0] / SCREEN_W * RASTER_SHAPE[1]).astype(int), 0, RASTER_SHAPE[1] - 1)
        rows = np.clip((pts[:, 1] / SCREEN_H * RASTER_SHAPE[0]).astype(int), 0, RASTER_SHAPE[0] - 1)
        grid[rows, cols] = 1.0
    return grid.ravel()


def observe(task: TaskSpec, cursor: ActionPoint, progress_state: float, raster: bool = False) -> np.ndarray:
    """Feature vector for the screen after the cursor reaches ``cursor``.

    ``progress_state`` is the fraction of the drag completed; the dragged
    element is drawn at that point of its motion.
    """
    progress = float(np.clip(progress_state, 0.0, 1.0))
    out = np.zeros(obs_width(raster))
    out[0], out[1] = nx(cursor.x), ny(cursor.y)
    out[2] = 1.0 if cursor.m is ButtonState.DOWN else 0.0
    out[3], out[4] = out[0], out[1]
    out[DOMAIN_OFFSET + task.domain.index] = 1.0
    slots = _slots(task, cursor, progress)
    out[SLOT_OFFSET:SLOT_OFFSET + len(slots)] = slots
    if raster:
        out[OBS_WIDTH:] = stroke_raster(task, progress)
    return out
