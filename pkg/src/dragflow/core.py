"""Action and trajectory types shared by every other module.

Coordinates are raw pixels in a fixed 1024x576 canvas. Arrays use the column
layout ``[x, y, m]`` where ``m`` is 1.0 while the button is held and 0.0 when
released.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Sequence

import numpy as np

SCREEN_W = 1024.0
SCREEN_H = 576.0
SENTINEL = (-1.0, -1.0)
FRAME_RATE = 60.0

DOWN = 1.0
UP = 0.0


class ButtonState(Enum):
    DOWN = "down"
    UP = "up"

    @property
    def flag(self) -> float:
        return DOWN if self is ButtonState.DOWN else UP

    @classmethod
    def from_flag(cls, value: float) -> "ButtonState":
        return cls.DOWN if value >= 0.5 else cls.UP


class OutOfBoundsError(ValueError):
    pass


def in_bounds(x: float, y: float) -> bool:
    return 0.0 <= x <= SCREEN_W and 0.0 <= y <= SCREEN_H


@dataclass(frozen=True)
class ActionPoint:
    x: float
    y: float
    m: ButtonState = ButtonState.DOWN

    def __post_init__(self):
        if (self.x, self.y) != SENTINEL and not in_bounds(self.x, self.y):
            raise OutOfBoundsError(f"point ({self.x}, {self.y}) outside the {SCREEN_W:g}x{SCREEN_H:g} canvas")

    @property
    def is_sentinel(self) -> bool:
        return (self.x, self.y) == SENTINEL

    def as_row(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.m.flag)


def _points_array(points: Iterable[ActionPoint] | np.ndarray) -> np.ndarray:
    if isinstance(points, np.ndarray):
        arr = np.array(points, dtype=float)
    else:
        arr = np.array([p.as_row() for p in points], dtype=float).reshape(-1, 3)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError(f"expected an (n, 3) array of [x, y, m], got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


def button_monotone(m: np.ndarray) -> bool:
    """True when no press follows a release inside the sequence."""
    down = np.asarray(m) >= 0.5
    released = np.flatnonzero(down[:-1] & ~down[1:])
    if released.size == 0:
        return True
    return not down[released[0] + 1:].any()


class ButtonOrderError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ActionChunk:
    """Fixed-length block of ``H`` actions predicted in one model call."""

    array: np.ndarray

    def __post_init__(self):
        arr = _points_array(self.array)
        object.__setattr__(self, "array", arr)
        if not button_monotone(arr[:, 2]):
            raise ButtonOrderError("button pressed again after release inside one chunk")

    @classmethod
    def from_points(cls, points: Sequence[ActionPoint]) -> "ActionChunk":
        return cls(_points_array(points))

    def __len__(self) -> int:
        return len(self.array)

    def __eq__(self, other):
        return isinstance(other, ActionChunk) and np.array_equal(self.array, other.array)

    @property
    def points(self) -> list[ActionPoint]:
        return [ActionPoint(float(x), float(y), ButtonState.from_flag(m)) for x, y, m in self.array]

    def spread(self) -> float:
        """Largest pairwise distance between the chunk's points, in pixels."""
        xy = self.array[:, :2]
        diff = xy[:, None, :] - xy[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Ordered cursor waypoints with 60 Hz timestamps and press/release flags."""

    points: np.ndarray
    timestamps: np.ndarray = field(default=None)
    critical: np.ndarray = field(default=None)

    def __post_init__(self):
        pts = _points_array(self.points)
        n = len(pts)
        if n == 0:
            raise ValueError("trajectory needs at least one waypoint")
        ts = np.arange(n) / FRAME_RATE if self.timestamps is None else np.array(self.timestamps, dtype=float)
        if ts.shape != (n,):
            raise ValueError("one timestamp per waypoint required")
        if np.any(np.diff(ts) < 0):
            raise ValueError("timestamps must be non-decreasing")
        if self.critical is None:
            crit = np.zeros(n, dtype=bool)
            crit[0] = crit[-1] = True
        else:
            crit = np.array(self.critical, dtype=bool)
            if crit.shape != (n,):
                raise ValueError("one critical flag per waypoint required")
        ts.setflags(write=False)
        crit.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "critical", crit)

    @classmethod
    def from_waypoints(cls, waypoints: Sequence[ActionPoint], timestamps=None, critical=None) -> "Trajectory":
        return cls(_points_array(waypoints), timestamps, critical)

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other):
        return (
            isinstance(other, Trajectory)
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.timestamps, other.timestamps)
            and np.array_equal(self.critical, other.critical)
        )

    @property
    def xy(self) -> np.ndarray:
        return self.points[:, :2]

    @property
    def waypoints(self) -> list[ActionPoint]:
        return [ActionPoint(float(x), float(y), ButtonState.from_flag(m)) for x, y, m in self.points]

    def arc_length(self) -> float:
        return float(np.sqrt((np.diff(self.xy, axis=0) ** 2).sum(-1)).sum())


def euclidean(a: ActionPoint, b: ActionPoint) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def resample_trajectory(traj: Trajectory, n: int) -> Trajectory:
    """Resample to ``n`` waypoints equally spaced in arc length.

    Endpoints are copied verbatim. Where several waypoints share the same arc
    position the earliest one wins, which also covers the all-identical click
    case (``n`` copies of the first point, last one taking the release).
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if len(traj) < 2:
        raise ValueError("trajectory needs at least two waypoints")
    pts = traj.points
    seg = np.sqrt((np.diff(pts[:, :2], axis=0) ** 2).sum(-1))
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    targets = np.linspace(0.0, total, n)

    idx = np.searchsorted(cum, targets, side="left")
    idx = np.clip(idx, 0, len(pts) - 1)
    exact = cum[idx] == targets
    lo = np.where(exact, idx, np.maximum(idx - 1, 0))
    hi = np.where(exact, idx, idx)
    span = cum[hi] - cum[lo]
    frac = np.divide(targets - cum[lo], span, out=np.zeros(n), where=span > 0)

    out = np.empty((n, 3))
    out[:, :2] = pts[lo, :2] + frac[:, None] * (pts[hi, :2] - pts[lo, :2])
    out[:, 2] = pts[lo, 2]
    ts = traj.timestamps[lo] + frac * (traj.timestamps[hi] - traj.timestamps[lo])
    out[0], out[-1] = pts[0], pts[-1]
    ts[0], ts[-1] = traj.timestamps[0], traj.timestamps[-1]

    crit = np.zeros(n, dtype=bool)
    crit[0] = traj.critical[0]
    crit[-1] = traj.critical[-1]
    inner = np.flatnonzero(traj.critical[1:-1]) + 1
    if inner.size and total > 0:
        crit[np.clip(np.rint(cum[inner] / total * (n - 1)).astype(int), 1, n - 2)] = True
    return Trajectory(out, np.maximum.accumulate(ts), crit)


def click_array(x: float, y: float, H: int) -> np.ndarray:
    arr = np.empty((H, 3))
    arr[:, 0], arr[:, 1], arr[:, 2] = x, y, UP
    arr[0, 2] = DOWN
    return arr


def chunk_to_click(x: float, y: float, H: int = 2) -> ActionChunk:
    """Click as a press followed by a release at one spot, padded with the release."""
    if H < 2:
        raise ValueError("a click needs at least two steps")
    if not in_bounds(x, y):
        raise OutOfBoundsError(f"click at ({x}, {y}) outside the canvas")
    return ActionChunk(click_array(x, y, H))


def pad_chunk(arr: np.ndarray, H: int) -> np.ndarray:
    """Extend a partial chunk to ``H`` rows by repeating its released terminal point."""
    arr = np.asarray(arr, dtype=float)
    if len(arr) >= H:
        return arr[:H].copy()
    tail = arr[-1].copy()
    tail[2] = UP
    return np.vstack([arr, np.repeat(tail[None], H - len(arr), axis=0)])
