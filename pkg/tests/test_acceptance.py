"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (printed in the terminal summary)
before asserting. The trend criteria train full-size models on the default
corpus (400 train and 101 eval episodes per drag domain, seed 1) and share
trained models through a session cache, so the whole module takes the better
part of an hour on one CPU core.
"""
import json
import time

import numpy as np
import pytest

from dragflow import cli
from dragflow.dataset import build_corpus, to_chunks
from dragflow.envs import CURVED_DOMAINS, DRAG_DOMAINS, Domain, generate_episode
from dragflow.eval import ate, evaluate, offline_predictions, score_offline, tea
from dragflow.eval.rollout import episode_rng
from dragflow.policy import (
    Adam,
    NoisePredictor,
    OracleReplay,
    TrainConfig,
    VelocityField,
    diffusion_loss,
    encode_chunk,
    flow_loss,
    integrate,
    sample_chunks,
    train,
)
from dragflow.policy.diffusion import denoise_chunks, draw_noise
from dragflow.policy.encoding import anchor, to_training_space, xy_to_net
from oracles import AffineField, ConstantField, brute_ate, brute_tea, gradcheck_instance

SEEDS = (0, 1, 2)
CURVED = [d.value for d in CURVED_DOMAINS]
SUBSET = [Domain.ROTATE.value, Domain.SLIDER_CAPTCHA.value]
TIMES: dict[str, float] = {}


@pytest.fixture(scope="module")
def corpus():
    start = time.perf_counter()
    c = build_corpus(400, 101, seed=1)
    TIMES["corpus"] = time.perf_counter() - start
    return c


_MODELS: dict[str, object] = {}
_REPORTS: dict[str, object] = {}


def trained(tag: str, episodes, config: TrainConfig):
    key = tag + json.dumps(config.to_dict(), sort_keys=True)
    if key not in _MODELS:
        start = time.perf_counter()
        _MODELS[key] = train(episodes, config).model
        TIMES.setdefault("train:" + key, time.perf_counter() - start)
    return _MODELS[key]


def online_report(tag: str, model, episodes, exec_steps: int = 1):
    key = f"{tag}|{json.dumps(model.config.to_dict(), sort_keys=True)}|{exec_steps}"
    if key not in _REPORTS:
        _REPORTS[key] = evaluate(model, episodes, "online", exec_steps, seed=0)[0]
    return _REPORTS[key]


def default_flow(corpus, seed, **overrides):
    return trained("drag", corpus.train, TrainConfig(seed=seed, **overrides))


# 1 --------------------------------------------------------------------------


def test_c01_gradient_correctness(criterion):
    start = time.perf_counter()
    worst = max(gradcheck_instance(seed) for seed in range(100))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-4 and elapsed < 60
    criterion(1, ok, f"max relative error {worst:.2e} over 100 instances in {elapsed:.1f} s")
    assert ok


# 2 --------------------------------------------------------------------------


def test_c02_metric_oracles(criterion):
    rng = np.random.default_rng(2)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        T = int(rng.integers(1, 100))
        gt = rng.uniform(0, [1024, 576], size=(T, 2))
        pred = gt + rng.normal(0, rng.uniform(0.5, 80), size=(T, 2))
        eps = float(rng.uniform(1, 40))
        worst = max(worst, abs(ate(pred, gt) - brute_ate(pred.tolist(), gt.tolist())),
                    abs(tea(pred, gt, eps) - brute_tea(pred.tolist(), gt.tolist(), eps)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and elapsed < 10
    criterion(2, ok, f"max |metric - brute force| {worst:.1e} on 1000 pairs in {elapsed:.2f} s")
    assert ok


# 3 --------------------------------------------------------------------------


def test_c03_oracle_closure(corpus, criterion):
    eps = corpus.eval
    start = time.perf_counter()
    report, _ = evaluate(OracleReplay(), eps, "both")
    elapsed = time.perf_counter() - start
    o = report.overall
    ok = len(eps) == 505 and o["ate"] == 0.0 and o["tea"] == 1.0 and o["success"] == 1.0 and elapsed < 60
    criterion(3, ok, f"{len(eps)} episodes: ATE {o['ate']}, TEA {o['tea']}, success {o['success']} in {elapsed:.1f} s")
    assert ok


# 4 --------------------------------------------------------------------------


def test_c04_sampler_exactness(criterion):
    rng = np.random.default_rng(4)
    c = rng.normal(size=(20, 3))
    noise = rng.normal(size=(3, 20, 3))
    gaps = [np.abs(integrate(ConstantField(c), noise, np.zeros((3, 1)), np.zeros((3, 2)), K) - (noise + c)).max()
            for K in (1, 5, 10)]
    a, b = -1.3, 0.7
    x0 = rng.normal(size=(1, 20, 3))
    exact = np.exp(a) * x0 + b * (np.exp(a) - 1) / a
    errs = [np.abs(integrate(AffineField(a, b, 20), x0, np.zeros((1, 1)), np.zeros((1, 2)), K) - exact).max()
            for K in (10, 20, 40, 80)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    ok = max(gaps) <= 1e-13 and bool(np.all(np.abs(ratios - 2.0) <= 0.4))
    criterion(4, ok, f"constant field max gap {max(gaps):.1e}; affine error ratios on doubling K "
                     f"{', '.join(f'{r:.3f}' for r in ratios)}")
    assert ok


# 5 --------------------------------------------------------------------------


def _overfit(kind: str, steps: int, batch: int, lr: float):
    """Train one head on a single (observation, state, chunk) triple, then sample it 20 times.

    Returns the largest per-coordinate pixel error over all samples, whether
    the button channel was always reproduced, and the wall time.
    """
    sample = to_chunks(generate_episode(Domain.ROTATE, 7), 20)[1]
    start = time.perf_counter()
    obs = np.tile(sample.obs, (batch, 1))
    state = np.tile(xy_to_net(sample.state[None]), (batch, 1))
    clean = np.tile(to_training_space(encode_chunk(sample.chunk[None]), anchor(obs[:1], state[:1])), (batch, 1, 1))
    weights = np.tile(sample.weights, (batch, 1))
    net = (VelocityField if kind == "flow" else NoisePredictor)(len(sample.obs), 20, (256, 256), seed=0)
    opt = Adam(net.parameters(), lr=lr)
    rng = np.random.default_rng(0)
    for i in range(steps):
        noise, t = rng.standard_normal(clean.shape), rng.uniform(size=batch)
        if kind == "flow":
            _, grads = flow_loss(net, obs, state, clean, weights, noise, t, 0.1)
        else:
            _, grads = diffusion_loss(net, obs, state, clean, noise, t)
        for p, g in zip(net.parameters(), grads):
            p.grad = g
        opt.lr = lr * 0.5 * (1 + np.cos(np.pi * i / steps))
        opt.step()
    worst, buttons = 0.0, True
    for seed in range(20):
        r = np.random.default_rng(seed)
        if kind == "flow":
            out = sample_chunks(net, sample.obs[None], sample.state[None], 10, r.standard_normal((1, 20, 3)))[0]
        else:
            init, steps_noise = draw_noise(r, 20, 16)
            out = denoise_chunks(net, sample.obs[None], sample.state[None], 16, init[None], steps_noise[:, None])[0]
        worst = max(worst, float(np.abs(out[:, :2] - sample.chunk[:, :2]).max()))
        buttons &= bool(np.array_equal(out[:, 2], sample.chunk[:, 2]))
    return worst, buttons, time.perf_counter() - start


def test_c05_overfit_one_sample(criterion):
    flow_err, flow_m, flow_t = _overfit("flow", 20000, 4, 3e-3)
    dif_err, dif_m, dif_t = _overfit("diffusion", 12000, 16, 2e-3)
    ok = flow_err <= 2 and dif_err <= 4 and flow_m and dif_m and flow_t < 60 and dif_t < 60
    criterion(5, ok, f"flow max error {flow_err:.2f} px ({flow_t:.0f} s), diffusion {dif_err:.2f} px ({dif_t:.0f} s), "
                     f"buttons reproduced {flow_m and dif_m}")
    assert ok


# 10 -------------------------------------------------------------------------


def test_c10_unified_click_spread(corpus, criterion):
    clicks = build_corpus(400, 101, seed=1, domains=[Domain.CLICK])
    model = trained("drag+click", corpus.train + clicks.train, TrainConfig(seed=0))
    eps = clicks.eval
    obs = np.stack([ep.observations[0] for ep in eps])
    states = np.full((len(eps), 2), -1.0)
    chunks = model.sample(eps, obs, states, [episode_rng(0, ep) for ep in eps])
    xy = chunks[..., :2]
    spread = np.sqrt(((xy[:, :, None] - xy[:, None]) ** 2).sum(-1)).max(axis=(1, 2))
    frac = float((spread < 20.0).mean())
    ok = frac >= 0.9
    criterion(10, ok, f"{frac:.1%} of {len(eps)} click tasks decode with spread < 20 px "
                      f"(median spread {np.median(spread):.2f} px)")
    assert ok


# 6 --------------------------------------------------------------------------


def test_c06_directional_regularization_trend(corpus, criterion):
    start = time.perf_counter()
    tr, ev = corpus.select("train", SUBSET), corpus.select("eval", SUBSET)
    means = {}
    for lam in (0.0, 0.1):
        per = {d: [] for d in SUBSET}
        for seed in SEEDS:
            model = trained("subset", tr, TrainConfig(seed=seed, lam=lam))
            report = online_report("subset", model, ev)
            for d in SUBSET:
                per[d].append(report.per_domain[d]["success"])
        means[lam] = {d: float(np.mean(v)) for d, v in per.items()}
        means[lam]["overall"] = float(np.mean([means[lam][d] for d in SUBSET]))
    elapsed = time.perf_counter() - start
    gaps = {d: means[0.1][d] - means[0.0][d] for d in SUBSET}
    ok = means[0.1]["overall"] >= means[0.0]["overall"] and all(g >= 0 for g in gaps.values()) and elapsed < 900
    criterion(6, ok, f"lambda=0.1 {means[0.1]['overall']:.3f} vs lambda=0 {means[0.0]['overall']:.3f}; per-domain gaps "
                     + ", ".join(f"{d} {g:+.3f}" for d, g in gaps.items()) + f"; {elapsed:.0f} s")
    assert ok


# 7 --------------------------------------------------------------------------


def test_c07_temporal_weight_trend(corpus, criterion):
    means = {}
    for w in (1.0, 10.0):
        vals = [online_report("drag", default_flow(corpus, seed, w_crit=w), corpus.eval).overall["success"]
                for seed in SEEDS]
        means[w] = float(np.mean(vals))
    ok = means[10.0] >= means[1.0]
    criterion(7, ok, f"w=10 mean online success {means[10.0]:.3f} vs w=1 {means[1.0]:.3f}")
    assert ok


# 8 --------------------------------------------------------------------------


def _curved_success(report) -> float:
    return float(np.mean([report.per_domain[d]["success"] for d in CURVED]))


def test_c08_modeling_comparison(corpus, criterion):
    curved = corpus.select("eval", CURVED)
    means = {}
    for kind in ("flow", "diffusion", "discrete"):
        vals = []
        for seed in SEEDS:
            if kind == "flow":
                report = online_report("drag", default_flow(corpus, seed, w_crit=10.0), corpus.eval)
            else:
                report = online_report("drag", default_flow(corpus, seed, model_kind=kind), curved)
            vals.append(_curved_success(report))
        means[kind] = float(np.mean(vals))
    ok = means["flow"] >= means["diffusion"] >= means["discrete"]
    criterion(8, ok, "curved-domain online success: " + ", ".join(f"{k} {v:.3f}" for k, v in means.items()))
    assert ok


# 9 --------------------------------------------------------------------------


def test_c09_execution_steps_trend(corpus, criterion):
    means = {}
    for n in (1, 5):
        vals = []
        for seed in SEEDS:
            model = default_flow(corpus, seed, H=10)
            rows = score_offline(offline_predictions(model, corpus.eval, exec_steps=n, seed=0))
            vals.append(float(np.mean([r["tea"] for r in rows])))
        means[n] = float(np.mean(vals))
    ok = means[1] >= means[5]
    criterion(9, ok, f"H=10 offline TEA: exec-steps 1 {means[1]:.4f} vs exec-steps 5 {means[5]:.4f}")
    assert ok


# 11 -------------------------------------------------------------------------


def _files(run):
    return {p.relative_to(run).as_posix(): p.read_bytes() for p in sorted(run.rglob("*")) if p.is_file()}


def test_c11_reproducibility_and_budget(corpus, tmp_path, criterion):
    gen = tmp_path / "gen-a"
    small = ["--per-domain-train", "3", "--per-domain-eval", "2", "--seed", "4",
             "--domains", "slider_captcha,rotate,drag_to_target,resize_handle,handwriting,click"]
    assert cli.main(["generate", *small, "--run-dir", str(gen)]) == 0
    corpus_dir = str(gen / "corpus")
    train_args = ["--corpus", corpus_dir, "--hidden", "16,16", "--epochs", "2"]
    commands = {
        "generate": ["generate", *small],
        "train": ["train", *train_args],
        "eval": ["eval", "--corpus", corpus_dir, "--checkpoint", None],
        "ablate": ["ablate", "--corpus", corpus_dir, "--axis", "head-mode", "--seeds", "0,1", "--hidden", "8",
                   "--epochs", "1"],
        "render": ["render", "--corpus", corpus_dir, "--episode", None, "--checkpoint", None],
    }
    outputs, identical = {}, {}
    for name, argv in commands.items():
        runs = []
        for tag in "ab":
            run = tmp_path / f"{name}-{tag}"
            if name in ("eval", "render"):
                argv[argv.index("--checkpoint") + 1] = str(tmp_path / "train-a" / "checkpoint.json")
            if name == "render":
                argv[argv.index("--episode") + 1] = json.loads(
                    (tmp_path / "eval-a" / "traces.jsonl").read_text().splitlines()[0])["episode_id"]
            assert cli.main([*argv, "--run-dir", str(run)]) == 0
            runs.append(_files(run))
        outputs[name] = sorted(runs[0])
        identical[name] = runs[0] == runs[1]

    # end-to-end budget: default corpus build, one default training, full evaluation
    model = default_flow(corpus, 0, w_crit=10.0)
    key = "train:drag" + json.dumps(model.config.to_dict(), sort_keys=True)
    start = time.perf_counter()
    evaluate(model, corpus.eval, "both", 1, seed=0)
    full_eval = time.perf_counter() - start
    total = TIMES["corpus"] + TIMES[key] + full_eval
    ok = all(identical.values()) and total < 1800
    criterion(11, ok, "byte-identical reruns: " + ", ".join(f"{k} {v}" for k, v in identical.items())
              + f"; corpus {TIMES['corpus']:.0f} s + train {TIMES[key]:.0f} s + eval {full_eval:.0f} s "
                f"= {total:.0f} s on one core")
    assert ok
