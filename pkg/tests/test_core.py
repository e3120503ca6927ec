import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dragflow.core import (
    DOWN,
    SCREEN_H,
    SCREEN_W,
    UP,
    ActionChunk,
    ActionPoint,
    ButtonOrderError,
    ButtonState,
    OutOfBoundsError,
    Trajectory,
    button_monotone,
    chunk_to_click,
    euclidean,
    pad_chunk,
    resample_trajectory,
)

coord_x = st.floats(0.0, SCREEN_W, allow_nan=False)
coord_y = st.floats(0.0, SCREEN_H, allow_nan=False)
points = st.builds(ActionPoint, coord_x, coord_y)


def line(x0, x1, k):
    pts = np.column_stack([np.linspace(x0, x1, k), np.zeros(k), np.full(k, DOWN)])
    pts[-1, 2] = UP
    return Trajectory(pts)


def test_button_state_has_two_values():
    assert {b.name for b in ButtonState} == {"DOWN", "UP"}


def test_sentinel_is_the_only_out_of_bounds_point():
    assert ActionPoint(-1.0, -1.0).is_sentinel
    with pytest.raises(OutOfBoundsError):
        ActionPoint(-1.0, 5.0)
    with pytest.raises(OutOfBoundsError):
        ActionPoint(SCREEN_W + 0.5, 0.0)
    assert not ActionPoint(SCREEN_W, SCREEN_H).is_sentinel


def test_resample_straight_segment_midpoint():
    out = resample_trajectory(line(0, 100, 5), 3)
    np.testing.assert_allclose(out.xy[:, 0], [0, 50, 100])
    assert out.critical.tolist() == [True, False, True]
    assert out.points[0, 2] == DOWN and out.points[-1, 2] == UP


def test_resample_click_returns_copies():
    click = Trajectory(np.array([[7.0, 9.0, DOWN], [7.0, 9.0, UP]]))
    out = resample_trajectory(click, 4)
    assert len(out) == 4
    assert np.all(out.xy == [7.0, 9.0])


def test_resample_quarter_arc_equal_chords():
    theta = np.linspace(0, np.pi / 2, 577)
    pts = np.column_stack([300 + 100 * np.cos(theta), 300 + 100 * np.sin(theta), np.full(577, DOWN)])
    out = resample_trajectory(Trajectory(pts), 20)
    # oracle: exact arc-length positions on the dense polyline, via a brute-force table
    seg = np.hypot(np.diff(pts[:, 0]), np.diff(pts[:, 1]))
    table = np.concatenate([[0.0], np.cumsum(seg)])
    chords = np.hypot(*np.diff(out.xy, axis=0).T)
    expected_chord = 2 * 100 * np.sin((np.pi / 2) / 19 / 2)
    assert np.all(np.abs(chords - expected_chord) <= 0.5)
    s = np.linspace(0, table[-1], 20)
    xs = np.interp(s, table, pts[:, 0])
    np.testing.assert_allclose(out.xy[:, 0], xs, atol=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(coord_x, coord_y), min_size=2, max_size=30), st.integers(2, 80))
def test_resample_preserves_endpoints(xy, n):
    pts = np.array([[x, y, DOWN] for x, y in xy])
    pts[-1, 2] = UP
    t = Trajectory(pts)
    out = resample_trajectory(t, n)
    assert len(out) == n
    assert np.array_equal(out.points[0], t.points[0])
    assert np.array_equal(out.points[-1], t.points[-1])
    assert np.all(np.diff(out.timestamps) >= 0)


def test_euclidean_examples():
    assert euclidean(ActionPoint(0, 0), ActionPoint(3, 4)) == 5.0
    assert euclidean(ActionPoint(10, 10), ActionPoint(10, 10)) == 0.0
    exact = Fraction(990) ** 2 + Fraction(490) ** 2
    assert abs(euclidean(ActionPoint(10, 10), ActionPoint(1000, 500)) - math.sqrt(exact)) < 1e-9


def test_euclidean_ignores_button():
    assert euclidean(ActionPoint(1, 2, ButtonState.DOWN), ActionPoint(4, 6, ButtonState.UP)) == 5.0


@settings(max_examples=200, deadline=None)
@given(points, points, points)
def test_euclidean_is_a_metric(a, b, c):
    assert euclidean(a, b) == euclidean(b, a)
    assert euclidean(a, b) >= 0
    assert (euclidean(a, b) == 0) == ((a.x, a.y) == (b.x, b.y))
    assert euclidean(a, c) <= euclidean(a, b) + euclidean(b, c) + 1e-9


def test_click_chunk_padding():
    c = chunk_to_click(512, 288, H=10)
    assert c.points[0] == ActionPoint(512, 288, ButtonState.DOWN)
    assert all(p == ActionPoint(512, 288, ButtonState.UP) for p in c.points[1:])
    minimal = chunk_to_click(0, 0, H=2)
    assert minimal.array.tolist() == [[0, 0, DOWN], [0, 0, UP]]
    assert ActionChunk(minimal.array).spread() == 0.0
    with pytest.raises(OutOfBoundsError):
        chunk_to_click(2000, 10)


def test_chunk_rejects_repress_after_release():
    arr = np.array([[1, 1, DOWN], [2, 2, UP], [3, 3, DOWN]], dtype=float)
    with pytest.raises(ButtonOrderError):
        ActionChunk(arr)
    assert not button_monotone(arr[:, 2])
    assert button_monotone(np.array([UP, UP]))
    assert button_monotone(np.array([DOWN, DOWN, UP, UP]))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 25), st.integers(1, 25))
def test_pad_chunk_shape_and_release_tail(k, H):
    arr = np.column_stack([np.arange(k, dtype=float), np.arange(k, dtype=float), np.full(k, DOWN)])
    out = pad_chunk(arr, H)
    assert out.shape == (H, 3)
    if k < H:
        assert np.all(out[k:, :2] == arr[-1, :2]) and np.all(out[k:, 2] == UP)
        ActionChunk(out)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 3)), timestamps=[0.0, 0.2, 0.1])
    with pytest.raises(ValueError):
        Trajectory(np.zeros((0, 3)))
    t = line(0, 10, 4)
    assert t.critical.tolist() == [True, False, False, True]
    assert t.arc_length() == pytest.approx(10.0)
