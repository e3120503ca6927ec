"""Task families and templated task proposal."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import numpy as np

from ..core import SCREEN_H, SCREEN_W


class Domain(Enum):
    SLIDER_CAPTCHA = "slider_captcha"
    ROTATE = "rotate"
    DRAG_TO_TARGET = "drag_to_target"
    RESIZE_HANDLE = "resize_handle"
    HANDWRITING = "handwriting"
    CLICK = "click"

    @property
    def index(self) -> int:
        return list(Domain).index(self)

    @property
    def is_click(self) -> bool:
        return self is Domain.CLICK


DRAG_DOMAINS = (
    Domain.SLIDER_CAPTCHA,
    Domain.ROTATE,
    Domain.DRAG_TO_TARGET,
    Domain.RESIZE_HANDLE,
    Domain.HANDWRITING,
)
CURVED_DOMAINS = (Domain.ROTATE, Domain.HANDWRITING)


def parse_domain(name: str | Domain) -> Domain:
    if isinstance(name, Domain):
        return name
    key = name.strip().lower().replace("-", "_")
    for d in Domain:
        if key in (d.value, d.name.lower(), d.value.replace("_", "")):
            return d
    raise ValueError(f"unknown domain {name!r}")


ROTATE_ANGLES = (-90.0, -60.0, -45.0, -30.0, -15.0, 15.0, 30.0, 45.0, 60.0, 90.0)
HANDWRITING_CANVAS = (212.0, 138.0, 600.0, 300.0)  # left, top, width, height

# Unit-box control points, chained cubics sharing endpoints (3k + 1 points).
GLYPHS: dict[str, tuple[tuple[float, float], ...]] = {
    "S": ((0.9, 0.15), (0.6, 0.0), (0.0, 0.1), (0.5, 0.5), (1.0, 0.9), (0.4, 1.0), (0.1, 0.85)),
    "C": ((0.9, 0.15), (0.6, 0.0), (0.05, 0.05), (0.05, 0.5), (0.05, 0.95), (0.6, 1.0), (0.9, 0.85)),
    "U": ((0.1, 0.05), (0.1, 0.7), (0.2, 1.0), (0.5, 1.0), (0.8, 1.0), (0.9, 0.7), (0.9, 0.05)),
    "Z": ((0.05, 0.05), (0.35, 0.05), (0.65, 0.05), (0.95, 0.05), (0.65, 0.35), (0.35, 0.65),
          (0.05, 0.95), (0.35, 0.95), (0.65, 0.95), (0.95, 0.95)),
    "~": ((0.0, 0.5), (0.1, 0.0), (0.25, 0.0), (0.33, 0.5), (0.42, 1.0), (0.58, 1.0), (0.67, 0.5),
          (0.75, 0.0), (0.9, 0.0), (1.0, 0.5)),
    "W": ((0.0, 0.05), (0.05, 0.6), (0.1, 0.95), (0.25, 0.95), (0.4, 0.95), (0.45, 0.4), (0.5, 0.3),
          (0.55, 0.4), (0.6, 0.95), (0.75, 0.95), (0.9, 0.95), (0.95, 0.6), (1.0, 0.05)),
}
GLYPH_NAMES = tuple(GLYPHS)

_NAMES = ("Fox", "Lion", "Logo", "Chart", "Title", "Photo", "Banner", "Badge", "Owl", "Map")
_FILES = ("Analysis.xlsx", "Q1Report.docx", "notes.txt", "budget.csv", "photo.png", "draft.pdf")
_FOLDERS = ("MyProject", "projectDocs", "Archive", "Backup", "Shared", "Inbox")
_WORDS = {"S": "Starlit", "C": "Cove", "U": "Umber", "Z": "Zest", "~": "wave", "W": "Willow"}

TEMPLATES: dict[Domain, tuple[str, ...]] = {
    Domain.SLIDER_CAPTCHA: (
        "Solve the slider captcha",
        "Drag the slider so the puzzle piece fills the gap",
        "Complete the slider puzzle",
        "Move the captcha knob to align the piece with the notch",
        "Slide the piece into the missing spot to verify you are human",
    ),
    Domain.ROTATE: (
        "Rotate the {name} {direction} by {angle} degrees",
        "Turn the {name} {angle} degrees {direction}",
        "Use the rotation handle to rotate {name} {direction} by {angle} degrees",
        "Rotate center {name} {direction} by {angle} degrees",
        "Spin the {name} {angle} degrees {direction}",
    ),
    Domain.DRAG_TO_TARGET: (
        "Drag {file} to {folder}",
        "Move {file} into the {folder} folder",
        "Drop {file} onto {folder}",
        "Put {file} in {folder} by dragging it",
        "File {file} under {folder}",
    ),
    Domain.RESIZE_HANDLE: (
        "Resize the {name} {how} to {scale} from its {handle}",
        "Shrink the {name} {how} to {scale} using the {handle} handle",
        "Resize width of the {name} to {scale} from its {handle}",
        "Drag the {handle} handle of {name} so it is {scale} of its size",
        "Scale the {name} {how} by {scale} from the {handle}",
    ),
    Domain.HANDWRITING: (
        'Write "{word}" on the canvas',
        'Handwrite the letter {glyph} on the canvas',
        'Draw a "{glyph}" stroke on the canvas',
        'Sign "{word}" in the drawing area',
        'Trace the shape {glyph} on the canvas',
    ),
    Domain.CLICK: (
        "Click the {name} button",
        "Press {name}",
        "Select the {name} item",
        "Click on {name}",
        "Tap the {name} control",
    ),
}


class TaskParamError(ValueError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    domain: Domain
    params: dict[str, Any] = field(hash=False)
    instruction: str
    seed: int

    def to_record(self) -> dict:
        return {"domain": self.domain.value, "params": self.params, "instruction": self.instruction, "seed": self.seed}

    @classmethod
    def from_record(cls, rec: dict) -> "TaskSpec":
        return cls(parse_domain(rec["domain"]), rec["params"], rec["instruction"], int(rec["seed"]))


def task_rng(domain: Domain, seed: int, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([int(seed) % 2**63, domain.index, stream])


def _u(rng, lo, hi) -> float:
    return float(rng.uniform(lo, hi))


def _slider(rng):
    return {
        "knob_x": _u(rng, 0.04 * SCREEN_W, 0.12 * SCREEN_W),
        "knob_y": _u(rng, 0.6 * SCREEN_H, 0.88 * SCREEN_H),
        "gap_x": _u(rng, 0.3 * SCREEN_W, 0.95 * SCREEN_W),
        "gap_y": _u(rng, 0.15 * SCREEN_H, 0.45 * SCREEN_H),
    }


def _rotate(rng):
    return {
        "center_x": _u(rng, 0.3 * SCREEN_W, 0.7 * SCREEN_W),
        "center_y": _u(rng, 0.35 * SCREEN_H, 0.7 * SCREEN_H),
        "radius": _u(rng, 60.0, 120.0),
        "target_angle": float(rng.choice(ROTATE_ANGLES)),
    }


def _drag_to_target(rng):
    icon = _u(rng, 48.0, 72.0)
    tw, th = _u(rng, 80.0, 140.0), _u(rng, 80.0, 140.0)
    while True:
        sx, sy = _u(rng, 80.0, SCREEN_W - 80.0), _u(rng, 80.0, SCREEN_H - 80.0)
        tx, ty = _u(rng, 80.0, SCREEN_W - 80.0), _u(rng, 80.0, SCREEN_H - 80.0)
        if np.hypot(tx - sx, ty - sy) >= 150.0:
            break
    return {"src_x": sx, "src_y": sy, "icon_size": icon, "dst_x": tx, "dst_y": ty, "dst_w": tw, "dst_h": th}


def _resize(rng):
    w, h = _u(rng, 200.0, 500.0), _u(rng, 100.0, 250.0)
    x0 = _u(rng, 60.0, SCREEN_W - 40.0 - w)
    y0 = _u(rng, 60.0, SCREEN_H - 40.0 - h)
    return {
        "x0": x0, "y0": y0, "x1": x0 + w, "y1": y0 + h,
        "scale": _u(rng, 0.2, 0.8),
        "handle": "corner" if rng.random() < 0.5 else "right",
    }


def _handwriting(rng):
    glyph = GLYPH_NAMES[int(rng.integers(len(GLYPH_NAMES)))]
    left, top, cw, ch = HANDWRITING_CANVAS
    gw, gh = _u(rng, 220.0, 560.0), _u(rng, 160.0, 280.0)
    ox, oy = _u(rng, left, left + cw - gw), _u(rng, top, top + ch - gh)
    ctrl = [[ox + u * gw, oy + v * gh] for u, v in GLYPHS[glyph]]
    return {"glyph": glyph, "origin_x": ox, "origin_y": oy, "width": gw, "height": gh, "control_points": ctrl}


def _click(rng):
    w, h = _u(rng, 40.0, 120.0), _u(rng, 24.0, 60.0)
    return {"x": _u(rng, 60.0, SCREEN_W - 60.0), "y": _u(rng, 40.0, SCREEN_H - 40.0), "width": w, "height": h}


_SAMPLERS = {
    Domain.SLIDER_CAPTCHA: _slider,
    Domain.ROTATE: _rotate,
    Domain.DRAG_TO_TARGET: _drag_to_target,
    Domain.RESIZE_HANDLE: _resize,
    Domain.HANDWRITING: _handwriting,
    Domain.CLICK: _click,
}


def _instruction(domain: Domain, params: dict, rng) -> str:
    template = TEMPLATES[domain][int(rng.integers(len(TEMPLATES[domain])))]
    name = _NAMES[int(rng.integers(len(_NAMES)))]
    fields = {"name": name}
    if domain is Domain.ROTATE:
        a = params["target_angle"]
        fields.update(angle=f"{abs(a):g}", direction="clockwise" if a > 0 else "counter-clockwise")
    elif domain is Domain.DRAG_TO_TARGET:
        fields.update(file=_FILES[int(rng.integers(len(_FILES)))], folder=_FOLDERS[int(rng.integers(len(_FOLDERS)))])
    elif domain is Domain.RESIZE_HANDLE:
        corner = params["handle"] == "corner"
        fields.update(
            scale=f"{params['scale']:.2f}",
            how="diagonally" if corner else "horizontally",
            handle="bottom-right corner" if corner else "right edge",
        )
    elif domain is Domain.HANDWRITING:
        fields.update(glyph=params["glyph"], word=_WORDS[params["glyph"]])
    return template.format(**fields)


def generate_task(domain: Domain | str, seed: int) -> TaskSpec:
    """Deterministic task proposal for ``(domain, seed)``."""
    domain = parse_domain(domain)
    rng = task_rng(domain, seed)
    params = _SAMPLERS[domain](rng)
    return TaskSpec(domain, params, _instruction(domain, params, rng), int(seed))


def _check(ok: bool, what: str):
    if not ok:
        raise TaskParamError(what)


def validate_task(task: TaskSpec) -> None:
    """Raise ``TaskParamError`` when params fall outside the generator's ranges."""
    p, d, eps = task.params, task.domain, 1e-9
    try:
        if d is Domain.SLIDER_CAPTCHA:
            _check(0.3 * SCREEN_W - eps <= p["gap_x"] <= 0.95 * SCREEN_W + eps, "gap_x outside [0.3W, 0.95W]")
            _check(0 <= p["knob_x"] < p["gap_x"], "knob must start left of the gap")
            _check(0 <= p["knob_y"] <= SCREEN_H, "knob_y off screen")
        elif d is Domain.ROTATE:
            _check(p["target_angle"] in ROTATE_ANGLES, f"target_angle {p['target_angle']} not in {ROTATE_ANGLES}")
            _check(60.0 - eps <= p["radius"] <= 120.0 + eps, "radius outside [60, 120]")
            _check(p["center_y"] - p["radius"] >= 0 and p["center_y"] + p["radius"] <= SCREEN_H, "handle circle off screen")
            _check(p["radius"] <= p["center_x"] <= SCREEN_W - p["radius"], "handle circle off screen")
        elif d is Domain.DRAG_TO_TARGET:
            _check(np.hypot(p["dst_x"] - p["src_x"], p["dst_y"] - p["src_y"]) >= 150.0 - eps, "boxes closer than 150 px")
            for k in ("src_x", "dst_x"):
                _check(0 <= p[k] <= SCREEN_W, f"{k} off screen")
            for k in ("src_y", "dst_y"):
                _check(0 <= p[k] <= SCREEN_H, f"{k} off screen")
        elif d is Domain.RESIZE_HANDLE:
            _check(0.2 - eps <= p["scale"] <= 0.8 + eps, "scale outside [0.2, 0.8]")
            _check(p["handle"] in ("right", "corner"), "unknown handle")
            _check(0 <= p["x0"] < p["x1"] <= SCREEN_W and 0 <= p["y0"] < p["y1"] <= SCREEN_H, "element box invalid")
        elif d is Domain.HANDWRITING:
            ctrl = np.asarray(p["control_points"], dtype=float)
            _check(p["glyph"] in GLYPHS, "unknown glyph")
            _check(len(ctrl) in (7, 10, 13), "glyph must chain 2 to 4 cubics")
            left, top, cw, ch = HANDWRITING_CANVAS
            _check(bool(np.all(ctrl[:, 0] >= left - eps) and np.all(ctrl[:, 0] <= left + cw + eps)), "glyph leaves canvas")
            _check(bool(np.all(ctrl[:, 1] >= top - eps) and np.all(ctrl[:, 1] <= top + ch + eps)), "glyph leaves canvas")
        elif d is Domain.CLICK:
            _check(0 <= p["x"] <= SCREEN_W and 0 <= p["y"] <= SCREEN_H, "click target off screen")
    except KeyError as exc:
        raise TaskParamError(f"missing parameter {exc}") from None
