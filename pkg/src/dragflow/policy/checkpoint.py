"""Self-describing checkpoint files: config echo, parameters in declared order, content hash."""
from __future__ import annotations

import base64
import hashlib
import json
from pathlib import Path

import numpy as np

from .train import Model, TrainConfig, build_heads

FORMAT = "dragflow-checkpoint"
FORMAT_VERSION = 1


class CheckpointError(Exception):
    pass


def _encode(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {"shape": list(a.shape), "data": base64.b64encode(a.tobytes()).decode("ascii")}


def _decode(rec: dict) -> np.ndarray:
    return np.frombuffer(base64.b64decode(rec["data"]), dtype="<f8").reshape(rec["shape"]).copy()


def _body(model: Model, extra: dict | None) -> dict:
    params = []
    for head in sorted(model.heads):
        net = model.heads[head].net
        for name, arr in zip(net.parameter_names(), net.get_state()):
            params.append({"head": head, "name": name, **_encode(arr)})
    return {
        "format": FORMAT,
        "format_version": FORMAT_VERSION,
        "config": model.config.to_dict(),
        "obs_dim": model.obs_dim,
        "heads": sorted(model.heads),
        "n_params": model.n_params,
        "parameters": params,
        "extra": extra or {},
    }


def content_hash(body: dict) -> str:
    return hashlib.sha256(json.dumps(body, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def save_checkpoint(model: Model, path, extra: dict | None = None) -> str:
    """Write the checkpoint and return its content hash."""
    body = _body(model, extra)
    digest = content_hash(body)
    Path(path).write_text(json.dumps({"sha256": digest, **body}, sort_keys=True) + "\n", encoding="utf-8")
    return digest


def load_checkpoint(path) -> tuple[Model, dict]:
    """Rebuild the model; returns ``(model, info)`` with the hash and extra metadata."""
    try:
        rec = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CheckpointError(f"{path}: no such checkpoint") from None
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: malformed checkpoint at byte offset {exc.pos}") from None
    if rec.get("format") != FORMAT or rec.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"{path}: not a version {FORMAT_VERSION} {FORMAT} file")
    digest = rec.pop("sha256", None)
    if digest != content_hash(rec):
        raise CheckpointError(f"{path}: content hash mismatch (file corrupted or edited)")
    config = TrainConfig.from_dict(rec["config"])
    heads = build_heads(config, rec["obs_dim"])
    if sorted(heads) != rec["heads"]:
        raise CheckpointError(f"{path}: heads {rec['heads']} do not match head mode {config.head_mode.value}")
    for head in sorted(heads):
        net = heads[head].net
        arrays = [_decode(p) for p in rec["parameters"] if p["head"] == head]
        names = [p["name"] for p in rec["parameters"] if p["head"] == head]
        if names != net.parameter_names():
            raise CheckpointError(f"{path}: parameter order for head {head} does not match the architecture")
        try:
            net.set_state(arrays)
        except ValueError as exc:
            raise CheckpointError(f"{path}: {exc}") from None
    return Model(config, heads, rec["obs_dim"]), {"sha256": digest, "extra": rec["extra"]}
