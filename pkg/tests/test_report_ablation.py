import importlib
import json

import pytest

from dragflow.eval import Axis, EvalReport, aggregate, evaluate, grid, run_ablation
from dragflow.policy import NumericalError, OracleReplay, TrainConfig

ablation_module = importlib.import_module("dragflow.eval.ablation")
TINY = TrainConfig(hidden=(8,), epochs=1, batch_size=64)


@pytest.mark.parametrize("axis,n", [("chunk-exec", 6), ("temporal-weight", 4), ("head-mode", 2),
                                    ("directional-reg", 2), ("model-kind", 3)])
def test_grid_sizes(axis, n):
    cells = grid(axis)
    assert len(cells) == n and len({c.label for c in cells}) == n


def test_chunk_exec_grid_contents():
    got = {(c.overrides["H"], c.exec_steps) for c in grid(Axis.CHUNK_EXEC)}
    assert got == {(H, n) for H in (10, 20) for n in (1, 2, 5)}


def test_overall_is_count_weighted():
    domains = ["rotate"] * 3 + ["handwriting"]
    rows = [{"ate": a, "tea": 1.0, "tea_endpoint": 1.0} for a in (1.0, 2.0, 3.0, 10.0)]
    per, overall = aggregate(domains, rows, [{"success": s} for s in (1, 1, 0, 0)])
    assert per["rotate"]["ate"] == 2.0 and per["handwriting"]["ate"] == 10.0
    assert overall["ate"] == pytest.approx(4.0) and overall["n"] == 4
    assert overall["success"] == pytest.approx(0.5)


def test_missing_protocol_reported_as_none():
    per, overall = aggregate(["rotate"], None, [{"success": 1.0}])
    assert per["rotate"]["ate"] is None and overall["success"] == 1.0


def test_report_round_trip_and_table(small_corpus):
    report, _ = evaluate(OracleReplay(), small_corpus.eval, "online")
    back = EvalReport.from_record(json.loads(report.to_json()))
    assert back.to_record() == report.to_record()
    lines = report.table().splitlines()
    assert lines[0].split() == ["domain", "n", "ATE(px)", "TEA", "TEA-end", "success"]
    assert lines[-1].split()[:3] == ["overall", str(len(small_corpus.eval)), "-"]


def test_evaluate_rejects_bad_arguments(small_corpus):
    with pytest.raises(ValueError):
        evaluate(OracleReplay(), small_corpus.eval, "sideways")
    with pytest.raises(ValueError):
        evaluate(OracleReplay(H=5), small_corpus.eval, exec_steps=6)
    with pytest.raises(ValueError):
        evaluate(OracleReplay(), [])


def test_failed_cell_is_marked_and_run_continues(small_corpus, monkeypatch):
    real = ablation_module.train

    def flaky(episodes, config):
        if config.w_crit == 5.0:
            raise NumericalError("non-finite loss nan at epoch 0 batch 0")
        return real(episodes, config)

    monkeypatch.setattr(ablation_module, "train", flaky)
    table = run_ablation("temporal-weight", small_corpus.train, small_corpus.eval, [0], TINY, mode="offline")
    failed = [c.cell.label for c in table.cells if c.failed]
    assert failed == ["w=5"]
    assert "failed" in table.table()
    rec = json.loads(table.to_json())
    assert [c["failed"] for c in rec["cells"]] == [False, True, False, False]


def test_ablation_summary_and_worker_independence(small_corpus):
    kw = dict(train_episodes=small_corpus.train, eval_episodes=small_corpus.eval, seeds=[0, 1], base=TINY,
              mode="offline")
    one = run_ablation("directional-reg", workers=1, **kw)
    two = run_ablation("directional-reg", workers=2, **kw)
    assert one.to_json() == two.to_json()
    summary = one.cells[0].summary()["overall"]
    assert set(summary["ate"]) == {"mean", "spread"} and summary["success"] is None
