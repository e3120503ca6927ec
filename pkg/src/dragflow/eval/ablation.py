"""Grid runner: one model per cell and seed, each scored offline and online."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..policy import HeadMode, ModelKind, NumericalError, TrainConfig, train
from .report import METRICS, EvalReport, evaluate

log = logging.getLogger(__name__)


class Axis(str, Enum):
    CHUNK_EXEC = "chunk-exec"
    TEMPORAL_WEIGHT = "temporal-weight"
    HEAD_MODE = "head-mode"
    DIRECTIONAL_REG = "directional-reg"
    MODEL_KIND = "model-kind"


CHUNK_SIZES = (10, 20)
EXEC_STEPS = (1, 2, 5)
TEMPORAL_WEIGHTS = (1.0, 5.0, 10.0, 15.0)
DIRECTIONAL_WEIGHTS = (0.0, 0.1)


@dataclass(frozen=True)
class Cell:
    label: str
    overrides: dict
    exec_steps: int = 1


def grid(axis: Axis) -> list[Cell]:
    axis = Axis(axis)
    if axis is Axis.CHUNK_EXEC:
        return [Cell(f"H={H} n={n}", {"H": H}, n) for H in CHUNK_SIZES for n in EXEC_STEPS]
    if axis is Axis.TEMPORAL_WEIGHT:
        return [Cell(f"w={w:g}", {"w_crit": w}) for w in TEMPORAL_WEIGHTS]
    if axis is Axis.HEAD_MODE:
        return [Cell(m.value, {"head_mode": m}) for m in HeadMode]
    if axis is Axis.DIRECTIONAL_REG:
        return [Cell(f"lambda={lam:g}", {"lam": lam}) for lam in DIRECTIONAL_WEIGHTS]
    return [Cell(k.value, {"model_kind": k}) for k in ModelKind]


@dataclass
class CellResult:
    cell: Cell
    reports: dict[int, EvalReport] = field(default_factory=dict)
    errors: dict[int, str] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return bool(self.errors)

    def summary(self) -> dict:
        """Across-seed mean and spread (population standard deviation) per domain and metric."""
        out = {}
        if not self.reports:
            return out
        first = next(iter(self.reports.values()))
        scopes = list(first.per_domain) + ["overall"]
        for scope in scopes:
            rows = [r.overall if scope == "overall" else r.per_domain[scope] for r in self.reports.values()]
            stats = {}
            for m in METRICS:
                vals = [row[m] for row in rows]
                if any(v is None for v in vals):
                    stats[m] = None
                else:
                    stats[m] = {"mean": float(np.mean(vals)), "spread": float(np.std(vals))}
            out[scope] = stats
        return out

    def to_record(self) -> dict:
        return {
            "label": self.cell.label, "overrides": _plain(self.cell.overrides), "exec_steps": self.cell.exec_steps,
            "failed": self.failed, "errors": {str(k): v for k, v in self.errors.items()},
            "reports": {str(k): r.to_record() for k, r in self.reports.items()}, "summary": self.summary(),
        }


def _plain(d: dict) -> dict:
    return {k: (v.value if isinstance(v, Enum) else v) for k, v in d.items()}


@dataclass
class AblationTable:
    axis: Axis
    seeds: list[int]
    cells: list[CellResult]
    base_config: dict

    def to_record(self) -> dict:
        return {"axis": self.axis.value, "seeds": self.seeds, "base_config": self.base_config,
                "cells": [c.to_record() for c in self.cells]}

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        head = ["cell", "ATE(px)", "TEA", "TEA-end", "success"]
        rows = []
        for c in self.cells:
            if c.failed and not c.reports:
                rows.append([c.cell.label, "failed", "", "", ""])
                continue
            s = c.summary()["overall"]
            row = [c.cell.label + (" (partial)" if c.failed else "")]
            for m in METRICS:
                v = s[m]
                row.append("-" if v is None else
                           (f"{v['mean']:.2f}±{v['spread']:.2f}" if m == "ate" else f"{v['mean']:.3f}±{v['spread']:.3f}"))
            rows.append(row)
        widths = [max(len(r[i]) for r in [head] + rows) for i in range(len(head))]
        fmt = lambda r: "  ".join(v.ljust(w) if i == 0 else v.rjust(w) for i, (v, w) in enumerate(zip(r, widths)))
        return "\n".join([fmt(head), fmt(["-" * w for w in widths])] + [fmt(r) for r in rows])


def _train_and_score(config: TrainConfig, train_episodes, eval_episodes, exec_steps: tuple, mode: str,
                     eval_seed: int):
    """Train one model and evaluate it at each execution-step setting; errors are returned, not raised."""
    try:
        model = train(train_episodes, config).model
        out = {}
        for n in exec_steps:
            report, _ = evaluate(model, eval_episodes, mode, 1 if model.single_shot else n, eval_seed,
                                 config={"train": config.to_dict()})
            report.seeds = [config.seed]
            out[n] = report
        return out
    except (NumericalError, ValueError, FloatingPointError) as exc:
        return f"{type(exc).__name__}: {exc}"


def run_ablation(axis, train_episodes, eval_episodes, seeds, base: TrainConfig | None = None,
                 mode: str = "both", eval_seed: int = 0, workers: int = 1) -> AblationTable:
    """Train one model per cell and seed and evaluate it.

    Cells sharing a training configuration (the chunk-exec grid evaluates
    each chunk size at several execution steps) reuse one trained model. A
    cell whose training fails is marked failed and the run continues. With
    ``workers > 1`` trainings run in separate processes; every job is
    seeded, so the table does not depend on the worker count.
    """
    axis = Axis(axis)
    base = base or TrainConfig()
    train_episodes, eval_episodes = list(train_episodes), list(eval_episodes)
    cells = [CellResult(c) for c in grid(axis)]
    jobs: dict[str, tuple[TrainConfig, list[int]]] = {}
    for res in cells:
        for seed in seeds:
            config = base.with_(seed=int(seed), **res.cell.overrides)
            key = json.dumps(config.to_dict(), sort_keys=True)
            jobs.setdefault(key, (config, []))[1].append(res.cell.exec_steps)
    args = [(cfg, train_episodes, eval_episodes, tuple(sorted(set(ns))), mode, eval_seed) for cfg, ns in jobs.values()]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_train_and_score, *zip(*args)))
    else:
        results = []
        for a in args:
            log.info("training %s", json.dumps(a[0].to_dict(), sort_keys=True))
            results.append(_train_and_score(*a))
    done = dict(zip(jobs, results))
    for res in cells:
        for seed in seeds:
            config = base.with_(seed=int(seed), **res.cell.overrides)
            out = done[json.dumps(config.to_dict(), sort_keys=True)]
            if isinstance(out, str):
                res.errors[int(seed)] = out
                log.warning("cell %s seed %d failed: %s", res.cell.label, seed, out)
            else:
                res.reports[int(seed)] = out[res.cell.exec_steps]
    return AblationTable(axis, [int(s) for s in seeds], cells, base.to_dict())
