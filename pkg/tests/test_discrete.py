import numpy as np
from hypothesis import given, settings, strategies as st

from dragflow.core import SCREEN_H, SCREEN_W, ButtonState
from dragflow.policy import N_BINS, EndpointClassifier, bin_centers, predict_single_shot, to_bins, token_loss
from dragflow.policy.discrete import bin_width


def _zero_output(model):
    model.net.weights[-1].data[:] = 0.0
    model.net.biases[-1].data[:] = 0.0


def test_bin_widths():
    assert bin_width(0) == SCREEN_W / 256 == 4.0
    assert bin_width(1) == SCREEN_H / 256 == 2.25


def test_uniform_logits_pick_lowest_bin():
    model = EndpointClassifier(5, hidden=(8,), seed=0)
    _zero_output(model)
    pts = model.predict(np.zeros((3, 5)), np.full((3, 2), -1.0))
    assert np.array_equal(pts, np.tile([[2.0, 1.125], [2.0, 1.125]], (3, 1, 1)))


def test_uniform_logits_loss_is_log_bins():
    model = EndpointClassifier(4, hidden=(6,), seed=1)
    _zero_output(model)
    loss, _ = token_loss(model, np.zeros((2, 4)), np.full((2, 2), -1.0), [[10, 20, 500, 300], [0, 0, 1023, 575]])
    assert abs(loss - np.log(N_BINS)) < 1e-12


coords = st.tuples(st.floats(0, SCREEN_W, exclude_max=True), st.floats(0, SCREEN_H, exclude_max=True))


@given(start=coords, end=coords)
@settings(max_examples=300, deadline=None)
def test_bin_centre_within_half_width(start, end):
    c = np.array([[*start, *end]])
    back = bin_centers(to_bins(c))
    half = np.array([bin_width(a) for a in range(4)]) / 2
    assert np.all(np.abs(back - c) <= half + 1e-12)


def test_to_bins_clips_out_of_range():
    idx = to_bins([[-5.0, -0.1, SCREEN_W, SCREEN_H + 40]])
    assert idx.tolist() == [[0, 0, 255, 255]]


def test_token_loss_gradient_matches_finite_differences(rng):
    model = EndpointClassifier(3, hidden=(5,), seed=2)
    for p in model.parameters():
        p.data[:] = rng.normal(0.0, 0.5, p.data.shape)
    obs = rng.normal(size=(2, 3))
    state = np.array([[100.0, 200.0], [-1.0, -1.0]])
    targets = np.array([[40.0, 50.0, 900.0, 30.0], [512.0, 288.0, 3.0, 570.0]])
    _, grads = token_loss(model, obs, state, targets)
    h = 1e-5
    for p, g in zip(model.parameters(), grads):
        flat = p.data.reshape(-1)
        for k in rng.choice(flat.size, size=min(6, flat.size), replace=False):
            old = flat[k]
            flat[k] = old + h
            up, _ = token_loss(model, obs, state, targets)
            flat[k] = old - h
            down, _ = token_loss(model, obs, state, targets)
            flat[k] = old
            assert abs((up - down) / (2 * h) - g.reshape(-1)[k]) < 1e-6


def test_predict_single_shot_press_then_release():
    model = EndpointClassifier(5, hidden=(8,), seed=0)
    press, release = predict_single_shot(model, np.zeros(5), np.array([-1.0, -1.0]))
    assert press.m is ButtonState.DOWN and release.m is ButtonState.UP
