"""Corpus construction, chunking and line-delimited serialization."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SENTINEL, Trajectory, pad_chunk
from .envs import (
    DRAG_DOMAINS,
    Domain,
    Episode,
    GoalRegion,
    RESAMPLED_LENGTH,
    TaskSpec,
    generate_task,
    make_episode,
    parse_domain,
    verify_episode,
)

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
GENERATOR_VERSION = "dragflow-synth-1"
EPISODES_FILE = "episodes.jsonl"
MANIFEST_FILE = "manifest.json"
SPLITS = ("train", "eval")
DEFAULT_W_CRIT = 10.0


class CorpusError(Exception):
    """Raised for malformed, truncated or inconsistent corpus files."""


class CorpusBuildError(RuntimeError):
    pass


@dataclass(eq=False)
class Corpus:
    episodes: list[Episode]
    split: dict[str, str]
    manifest: dict = field(default_factory=dict)

    def __eq__(self, other):
        return (
            isinstance(other, Corpus)
            and self.split == other.split
            and self.manifest == other.manifest
            and len(self.episodes) == len(other.episodes)
            and all(a == b for a, b in zip(self.episodes, other.episodes))
        )

    def select(self, split: str | None = None, domains=None) -> list[Episode]:
        keep = None if domains is None else {parse_domain(d) for d in domains}
        return [
            ep for ep in self.episodes
            if (split is None or self.split[ep.id] == split) and (keep is None or ep.domain in keep)
        ]

    @property
    def train(self) -> list[Episode]:
        return self.select("train")

    @property
    def eval(self) -> list[Episode]:
        return self.select("eval")


def episode_seed(global_seed: int, split: str, k: int) -> int:
    """Candidate seeds: train uses even offsets, eval odd, so the two never collide."""
    return int(global_seed) * 10_000_000 + 2 * k + SPLITS.index(split)


def _abort(domain, rejected, attempted):
    raise CorpusBuildError(
        f"{domain.value}: {rejected} of {attempted} episodes failed verification; generator is broken")


def _build_one(domain, seed, density, sigma, raster):
    ep = make_episode(generate_task(domain, seed), density, sigma, raster)
    return ep, verify_episode(ep)


def build_corpus(per_domain_train: int, per_domain_eval: int, seed: int, domains=DRAG_DOMAINS,
                 density: int = 80, sigma: float = 0.0, raster: bool = False) -> Corpus:
    """Propose, synthesize and verify episodes for every domain and split.

    Episodes that fail verification are replaced by the next candidate seed;
    more than 50% rejections in a domain aborts the build.
    """
    if per_domain_train < 1 or per_domain_eval < 1:
        raise ValueError("per-domain counts must be at least 1")
    domains = [parse_domain(d) for d in domains]
    episodes, split = [], {}
    counts, rejections = {}, {}
    for domain in domains:
        rejected = attempted = 0
        counts[domain.value] = {}
        for name, want in (("train", per_domain_train), ("eval", per_domain_eval)):
            k = 0
            got = 0
            while got < want:
                ep, ok = _build_one(domain, episode_seed(seed, name, k), density, sigma, raster)
                k += 1
                attempted += 1
                if ok:
                    episodes.append(ep)
                    split[ep.id] = name
                    got += 1
                else:
                    rejected += 1
                if rejected >= 10 and rejected / attempted > 0.5:
                    _abort(domain, rejected, attempted)
            counts[domain.value][name] = got
        if rejected / attempted > 0.5:
            _abort(domain, rejected, attempted)
        rejections[domain.value] = rejected
        if rejected:
            log.info("%s: %d episodes regenerated after failed verification", domain.value, rejected)
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "generator_version": GENERATOR_VERSION,
        "global_seed": int(seed),
        "density": int(density),
        "sigma": float(sigma),
        "raster": bool(raster),
        "domains": [d.value for d in domains],
        "counts": counts,
        "rejections": rejections,
        "n_episodes": len(episodes),
    }
    return Corpus(episodes, split, manifest)


@dataclass(frozen=True)
class ChunkSample:
    obs: np.ndarray
    state: np.ndarray
    chunk: np.ndarray
    weights: np.ndarray


def to_chunks(episode: Episode, H: int, w_crit: float = DEFAULT_W_CRIT, stride: int | None = None,
              n: int = RESAMPLED_LENGTH) -> list[ChunkSample]:
    """Cut the resampled trajectory into training windows of ``H`` actions.

    Each window is paired with the action state (the waypoint just before it,
    or the sentinel for the first window) and with the stored observation
    nearest that waypoint, i.e. what the closed-loop environment would serve
    after executing it. Press and release steps get weight ``w_crit``.
    ``stride`` defaults to ``H`` (non-overlapping windows).
    """
    stride = H if stride is None else stride
    if H < 1 or stride < 1:
        raise ValueError("H and stride must be positive")
    ref = episode.reference_points(n)
    if episode.is_click:
        crit = np.ones(len(ref), dtype=bool)
    else:
        crit = episode.resampled(n).critical
    out = []
    for s in range(0, len(ref), stride):
        chunk = pad_chunk(ref[s:s + H], H)
        w = np.ones(H)
        live = crit[s:s + H]
        w[:len(live)][live] = w_crit
        if s == 0:
            state = np.array(SENTINEL)
            obs = episode.observations[0]
        else:
            state = ref[s - 1, :2].copy()
            obs = episode.observations[episode.nearest_waypoint(state)[0]]
        out.append(ChunkSample(obs.copy(), state, chunk, w))
    return out


def chunk_arrays(episodes, H: int, w_crit: float = DEFAULT_W_CRIT, stride: int | None = None) -> dict[str, np.ndarray]:
    """Stack the windows of many episodes into training arrays."""
    obs, state, chunk, weights, click, owner = [], [], [], [], [], []
    for k, ep in enumerate(episodes):
        for c in to_chunks(ep, H, w_crit, stride):
            obs.append(c.obs)
            state.append(c.state)
            chunk.append(c.chunk)
            weights.append(c.weights)
            click.append(ep.is_click)
            owner.append(k)
    return {
        "obs": np.array(obs), "state": np.array(state), "chunk": np.array(chunk),
        "weights": np.array(weights), "is_click": np.array(click, dtype=bool), "episode": np.array(owner),
    }


# serialization

def episode_record(ep: Episode) -> dict:
    pts, ts = ep.trajectory.points, ep.trajectory.timestamps
    return {
        "id": ep.id,
        "domain": ep.task.domain.value,
        "seed": ep.task.seed,
        "instruction": ep.task.instruction,
        "params": ep.task.params,
        "waypoints": [[float(x), float(y), int(m), float(t)] for (x, y, m), t in zip(pts, ts)],
        "critical": [int(i) for i in np.flatnonzero(ep.trajectory.critical)],
        "goal": ep.goal.to_record(),
        "observations": ep.observations.tolist(),
        "schema_version": SCHEMA_VERSION,
    }


def episode_from_record(rec: dict) -> Episode:
    task = TaskSpec(parse_domain(rec["domain"]), rec["params"], rec["instruction"], int(rec["seed"]))
    wp = np.asarray(rec["waypoints"], dtype=float).reshape(-1, 4)
    crit = np.zeros(len(wp), dtype=bool)
    crit[np.asarray(rec["critical"], dtype=int)] = True
    traj = Trajectory(wp[:, :3], wp[:, 3], crit)
    ep = Episode(task, traj, np.asarray(rec["observations"], dtype=float), GoalRegion.from_record(rec["goal"]))
    if ep.id != rec["id"]:
        raise ValueError(f"id {rec['id']!r} does not match domain/seed ({ep.id!r})")
    return ep


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=True, allow_nan=False)


def save_corpus(corpus: Corpus, path) -> Path:
    """Write ``episodes.jsonl`` and ``manifest.json`` into directory ``path``."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / EPISODES_FILE, "w", encoding="utf-8", newline="\n") as fh:
        for ep in corpus.episodes:
            fh.write(_dumps(episode_record(ep)) + "\n")
    manifest = dict(corpus.manifest)
    manifest["split"] = {name: [ep.id for ep in corpus.episodes if corpus.split[ep.id] == name] for name in SPLITS}
    manifest["n_episodes"] = len(corpus.episodes)
    (path / MANIFEST_FILE).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_corpus(path) -> Corpus:
    path = Path(path)
    try:
        manifest = json.loads((path / MANIFEST_FILE).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise CorpusError(f"{path}: no {MANIFEST_FILE}") from None
    except json.JSONDecodeError as exc:
        raise CorpusError(f"{path / MANIFEST_FILE}: malformed JSON at byte offset {exc.pos}: {exc.msg}") from None
    if manifest.get("schema_version") != SCHEMA_VERSION:
        raise CorpusError(f"{path / MANIFEST_FILE}: schema version {manifest.get('schema_version')!r}, "
                          f"expected {SCHEMA_VERSION}")
    data_path = path / EPISODES_FILE
    try:
        raw = data_path.read_bytes()
    except FileNotFoundError:
        raise CorpusError(f"{path}: no {EPISODES_FILE}") from None

    episodes, offset = [], 0
    for line in raw.splitlines(keepends=True):
        if not line.endswith(b"\n"):
            raise CorpusError(f"{data_path}: truncated record at byte offset {offset} (no line terminator)")
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorpusError(f"{data_path}: malformed record at byte offset {offset + exc.pos}: {exc.msg}") from None
        if rec.get("schema_version") != SCHEMA_VERSION:
            raise CorpusError(f"{data_path}: record at byte offset {offset} has schema version "
                              f"{rec.get('schema_version')!r}, expected {SCHEMA_VERSION}")
        try:
            episodes.append(episode_from_record(rec))
        except (KeyError, ValueError, TypeError) as exc:
            raise CorpusError(f"{data_path}: invalid record at byte offset {offset}: {exc}") from None
        offset += len(line)

    if len(episodes) != manifest.get("n_episodes"):
        raise CorpusError(f"{data_path}: {len(episodes)} records end at byte offset {offset}, "
                          f"manifest promises {manifest.get('n_episodes')}")
    split = {}
    for name in SPLITS:
        for eid in manifest["split"][name]:
            split[eid] = name
    ids = [ep.id for ep in episodes]
    if set(ids) != set(split) or len(set(ids)) != len(ids):
        raise CorpusError(f"{data_path}: episode ids do not match the manifest split")
    actual = {}
    for ep in episodes:
        actual.setdefault(ep.domain.value, {"train": 0, "eval": 0})[split[ep.id]] += 1
    if actual != manifest["counts"]:
        raise CorpusError(f"{path / MANIFEST_FILE}: per-domain counts {manifest['counts']} disagree with records {actual}")
    manifest = {k: v for k, v in manifest.items() if k != "split"}
    return Corpus(episodes, split, manifest)
