"""SVG drawings of ground-truth and predicted cursor paths over the task's goal region."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from pathlib import Path

import numpy as np

from .core import DOWN, SCREEN_H, SCREEN_W
from .envs import Episode, GoalKind
from .envs.goals import ANGLE_TOLERANCE
from .envs.synthesis import bezier_chain, rotation_point

SVG_NS = "http://www.w3.org/2000/svg"
GT_STYLE = {"stroke": "#1f5fa8", "stroke-width": "3", "fill": "none", "stroke-linecap": "round",
            "stroke-linejoin": "round"}
PRED_STYLE = {"stroke": "#d9480f", "stroke-width": "2", "fill": "none", "stroke-linecap": "round",
              "stroke-linejoin": "round", "stroke-dasharray": "6 4"}
GOAL_STYLE = {"fill": "#2f9e44", "fill-opacity": "0.18", "stroke": "#2f9e44", "stroke-width": "1.5"}


def _pts(xy) -> str:
    return " ".join(f"{x:.2f},{y:.2f}" for x, y in np.asarray(xy, dtype=float).reshape(-1, 2))


def _goal_element(episode: Episode) -> ET.Element:
    goal, p = episode.goal, episode.goal.params
    if goal.kind is GoalKind.ENDPOINT_DISC:
        return ET.Element("circle", {"cx": f"{p['center'][0]:.2f}", "cy": f"{p['center'][1]:.2f}",
                                     "r": f"{p['radius']:.2f}"})
    if goal.kind is GoalKind.BOX_CONTAINMENT:
        x0, y0, x1, y1 = p["box"]
        return ET.Element("rect", {"x": f"{x0:.2f}", "y": f"{y0:.2f}", "width": f"{x1 - x0:.2f}",
                                   "height": f"{y1 - y0:.2f}"})
    if goal.kind is GoalKind.ANGLE_TOLERANCE:
        cx, cy = p["center"]
        r = episode.task.params["radius"] * 1.25
        lo, hi = p["target_angle"] - p.get("tolerance", ANGLE_TOLERANCE), p["target_angle"] + p.get("tolerance", ANGLE_TOLERANCE)
        (ax, ay), (bx, by) = rotation_point(cx, cy, r, lo), rotation_point(cx, cy, r, hi)
        d = f"M {cx:.2f} {cy:.2f} L {ax:.2f} {ay:.2f} A {r:.2f} {r:.2f} 0 0 1 {bx:.2f} {by:.2f} Z"
        return ET.Element("path", {"d": d})
    # stroke coverage: a band along the glyph outline
    band = bezier_chain(np.asarray(p["control_points"], dtype=float), 64)
    d = "M " + " L ".join(f"{x:.2f} {y:.2f}" for x, y in band)
    style = {"fill": "none", "stroke-opacity": "0.25", "stroke-width": f"{2 * p['radius']:.2f}",
             "stroke-linecap": "round", "stroke-linejoin": "round"}
    return ET.Element("path", {"d": d, **style})


def _press_release(points: np.ndarray) -> tuple[np.ndarray | None, np.ndarray | None]:
    down = np.flatnonzero(points[:, 2] == DOWN) if len(points) else np.array([], dtype=int)
    if not len(down):
        return None, None
    press = points[down[0], :2]
    after = np.flatnonzero(points[down[0]:, 2] != DOWN)
    release = points[down[0] + after[0], :2] if len(after) else None
    return press, release


def render_svg(episode: Episode, predicted=None, title: str | None = None) -> str:
    """SVG text with the ground-truth and predicted polylines, press/release markers and the goal.

    Markers follow the predicted path when one is given, otherwise the
    ground truth. Degenerate (zero-length) paths, such as clicks, still draw
    as dots thanks to round line caps.
    """
    ET.register_namespace("", SVG_NS)
    svg = ET.Element("svg", {"xmlns": SVG_NS, "width": f"{SCREEN_W:g}", "height": f"{SCREEN_H:g}",
                             "viewBox": f"0 0 {SCREEN_W:g} {SCREEN_H:g}"})
    ET.SubElement(svg, "title").text = title or episode.id
    ET.SubElement(svg, "rect", {"class": "screen", "x": "0", "y": "0", "width": f"{SCREEN_W:g}",
                                "height": f"{SCREEN_H:g}", "fill": "#ffffff", "stroke": "#cccccc"})
    goal = _goal_element(episode)
    goal.set("class", "goal")
    for k, v in GOAL_STYLE.items():
        goal.attrib.setdefault(k, v)
    svg.append(goal)

    gt = episode.trajectory.points
    pred = np.zeros((0, 3)) if predicted is None else np.asarray(predicted, dtype=float).reshape(-1, 3)
    ET.SubElement(svg, "polyline", {"class": "ground-truth", "points": _pts(gt[:, :2]), **GT_STYLE})
    ET.SubElement(svg, "polyline", {"class": "predicted", "points": _pts(pred[:, :2]), **PRED_STYLE})

    press, release = _press_release(pred if len(pred) else gt)
    source = pred if len(pred) else gt
    if press is None:
        press = source[0, :2]
    if release is None:
        release = source[-1, :2]
    ET.SubElement(svg, "circle", {"class": "marker press", "cx": f"{press[0]:.2f}", "cy": f"{press[1]:.2f}",
                                  "r": "6", "fill": "#000000"})
    ET.SubElement(svg, "circle", {"class": "marker release", "cx": f"{release[0]:.2f}",
                                  "cy": f"{release[1]:.2f}", "r": "6", "fill": "#ffffff", "stroke": "#000000",
                                  "stroke-width": "2"})
    ET.indent(svg)
    return ET.tostring(svg, encoding="unicode") + "\n"


def write_svg(path, episode: Episode, predicted=None, title: str | None = None) -> Path:
    path = Path(path)
    path.write_text(render_svg(episode, predicted, title), encoding="utf-8")
    return path

