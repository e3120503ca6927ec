import xml.etree.ElementTree as ET

import numpy as np
import pytest

from dragflow.envs import Domain, generate_episode
from dragflow.render import SVG_NS, render_svg, write_svg

NS = {"s": SVG_NS}


def _parse(text):
    return ET.fromstring(text)


@pytest.mark.parametrize("domain", list(Domain))
def test_structure(domain):
    ep = generate_episode(domain, 5)
    pred = ep.reference_points() + np.array([3.0, -2.0, 0.0])
    root = _parse(render_svg(ep, np.clip(pred, 0, 570)))
    lines = root.findall("s:polyline", NS)
    assert [l.get("class") for l in lines] == ["ground-truth", "predicted"]
    markers = [e for e in root.iter() if "marker" in (e.get("class") or "")]
    assert sorted(m.get("class") for m in markers) == ["marker press", "marker release"]
    assert len([e for e in root.iter() if e.get("class") == "goal"]) == 1


def test_styles_differ():
    root = _parse(render_svg(generate_episode(Domain.ROTATE, 1), generate_episode(Domain.ROTATE, 1).reference_points()))
    gt, pred = root.findall("s:polyline", NS)
    assert gt.get("stroke") != pred.get("stroke")
    assert pred.get("stroke-dasharray") and not gt.get("stroke-dasharray")


def test_markers_follow_prediction():
    ep = generate_episode(Domain.SLIDER_CAPTCHA, 2)
    pred = np.array([[100.0, 100.0, 0.0], [110.0, 100.0, 1.0], [200.0, 120.0, 1.0], [220.0, 130.0, 0.0]])
    root = _parse(render_svg(ep, pred))
    press = next(e for e in root.iter() if e.get("class") == "marker press")
    release = next(e for e in root.iter() if e.get("class") == "marker release")
    assert (float(press.get("cx")), float(press.get("cy"))) == (110.0, 100.0)
    assert (float(release.get("cx")), float(release.get("cy"))) == (220.0, 130.0)


def test_click_and_empty_prediction():
    ep = generate_episode(Domain.CLICK, 3)
    root = _parse(render_svg(ep))
    gt, pred = root.findall("s:polyline", NS)
    assert len(gt.get("points").split()) == 2 and pred.get("points") == ""
    press = next(e for e in root.iter() if e.get("class") == "marker press")
    assert float(press.get("cx")) == pytest.approx(ep.trajectory.xy[0, 0], abs=0.01)


def test_deterministic_file(tmp_path):
    ep = generate_episode(Domain.HANDWRITING, 4)
    a = write_svg(tmp_path / "a.svg", ep, ep.reference_points())
    b = write_svg(tmp_path / "b.svg", ep, ep.reference_points())
    assert a.read_bytes() == b.read_bytes()
