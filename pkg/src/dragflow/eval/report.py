"""Per-domain aggregation, table rendering and the ``evaluate`` entry point."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..envs import DRAG_DOMAINS, Domain
from .metrics import TEA_EPSILON
from .offline import offline_predictions, score_offline
from .rollout import EPSILON_MATCH, online_eval

METRICS = ("ate", "tea", "tea_endpoint", "success")
MODES = ("offline", "online", "both")


@dataclass
class EvalReport:
    """Per-domain and overall metrics; a metric is ``None`` when its protocol was not run."""

    per_domain: dict[str, dict]
    overall: dict
    config: dict = field(default_factory=dict)
    seeds: list[int] = field(default_factory=list)

    def to_record(self) -> dict:
        return {"per_domain": self.per_domain, "overall": self.overall, "config": self.config, "seeds": self.seeds}

    @classmethod
    def from_record(cls, rec: dict) -> "EvalReport":
        return cls(rec["per_domain"], rec["overall"], rec.get("config", {}), rec.get("seeds", []))

    def to_json(self) -> str:
        return json.dumps(self.to_record(), indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        head = ["domain", "n", "ATE(px)", "TEA", "TEA-end", "success"]
        rows = [[name, str(s["n"])] + [_fmt(s[m], m) for m in METRICS]
                for name, s in list(self.per_domain.items()) + [("overall", self.overall)]]
        widths = [max(len(r[c]) for r in [head] + rows) for c in range(len(head))]
        line = lambda r: "  ".join(v.ljust(w) if c == 0 else v.rjust(w) for c, (v, w) in enumerate(zip(r, widths)))
        return "\n".join([line(head), line(["-" * w for w in widths])] + [line(r) for r in rows])


def _fmt(v, metric) -> str:
    if v is None:
        return "-"
    return f"{v:.2f}" if metric == "ate" else f"{v:.3f}"


def _domain_order(names):
    order = [d.value for d in list(DRAG_DOMAINS) + [Domain.CLICK]]
    return sorted(names, key=lambda n: order.index(n) if n in order else len(order))


def aggregate(domains: list[str], offline_rows=None, online_rows=None) -> tuple[dict, dict]:
    """Per-domain means of per-episode rows, and the episode-count-weighted overall means."""
    per = {}
    for name in _domain_order(set(domains)):
        idx = [i for i, d in enumerate(domains) if d == name]
        stats = {"n": len(idx)}
        for m in METRICS:
            rows = online_rows if m == "success" else offline_rows
            stats[m] = None if rows is None else sum(float(rows[i][m]) for i in idx) / len(idx)
        per[name] = stats
    total = sum(s["n"] for s in per.values())
    overall = {"n": total}
    for m in METRICS:
        vals = [(s[m], s["n"]) for s in per.values()]
        overall[m] = None if any(v is None for v, _ in vals) else sum(v * n for v, n in vals) / total
    return per, overall


def evaluate(policy, episodes, mode: str = "both", exec_steps: int = 1, seed: int = 0,
             step_budget: int | None = None, epsilon_match: float = EPSILON_MATCH,
             tea_epsilon: float = TEA_EPSILON, config: dict | None = None):
    """Run the offline and/or online protocol; returns ``(EvalReport, traces)``."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    episodes = list(episodes)
    if not episodes:
        raise ValueError("no evaluation episodes")
    if not getattr(policy, "single_shot", False) and exec_steps > policy.H:
        raise ValueError(f"exec_steps {exec_steps} exceeds chunk length {policy.H}")
    offline_rows = online_rows = None
    traces = []
    if mode in ("offline", "both"):
        offline_rows = score_offline(offline_predictions(policy, episodes, exec_steps, seed), tea_epsilon)
    if mode in ("online", "both"):
        traces = online_eval(policy, episodes, exec_steps, seed, step_budget, epsilon_match)
        online_rows = [{"success": float(t.success)} for t in traces]
    per, overall = aggregate([ep.domain.value for ep in episodes], offline_rows, online_rows)
    echo = {"mode": mode, "exec_steps": exec_steps, "step_budget": step_budget,
            "epsilon_match": epsilon_match, "tea_epsilon": tea_epsilon, **(config or {})}
    return EvalReport(per, overall, echo, [int(seed)]), traces
