"""Command-line entry point: generate, train, eval, ablate and render.

Every run writes into its own directory (``<command>-<timestamp>-seed<seed>``
under ``--runs-root`` unless ``--run-dir`` is given) holding ``config.json``,
the fully resolved configuration. Defaults can come from an INI file given
with ``--config``: keys in the ``[DEFAULT]`` section and in the section named
after the command are read, and command-line flags override them.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
import time
from dataclasses import fields
from pathlib import Path

import numpy as np

from .dataset import GENERATOR_VERSION, SCHEMA_VERSION, CorpusBuildError, CorpusError, build_corpus, load_corpus, save_corpus
from .envs import DRAG_DOMAINS, parse_domain
from .eval import Axis, evaluate, online_eval, run_ablation
from .policy import (
    CheckpointError,
    HeadMode,
    ModelKind,
    NumericalError,
    OracleReplay,
    TrainConfig,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .render import write_svg

log = logging.getLogger("dragflow")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3
# flags that only choose where output goes; they are left out of the config echo
LOCATION_KEYS = {"command", "config", "run_dir", "runs_root", "log_level"}


REQUIRED = {"generate": (), "train": ("corpus",), "eval": ("corpus",), "ablate": ("corpus", "axis"),
            "render": ("corpus", "episode")}


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _csv(kind):
    def parse(text):
        return [kind(v) for v in str(text).split(",") if v.strip()]
    parse.__name__ = f"{kind.__name__} list"
    return parse


def _domains(text):
    try:
        return [parse_domain(d.strip()).value for d in str(text).split(",") if d.strip()]
    except (KeyError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_common(p):
    p.add_argument("--config", help="INI file with defaults ([DEFAULT] and [<command>] sections)")
    p.add_argument("--runs-root", default="runs", help="parent of the timestamped run directory")
    p.add_argument("--run-dir", help="explicit output directory (overrides --runs-root)")
    p.add_argument("--log-level", default="WARNING")


def _add_train_flags(p):
    d = TrainConfig()
    p.add_argument("--H", type=int, default=d.H, help="chunk length")
    p.add_argument("--w-crit", type=float, default=d.w_crit, help="press/release loss weight")
    p.add_argument("--lam", type=float, default=d.lam, help="directional regularization weight")
    p.add_argument("--K", type=int, default=d.K, help="Euler steps at sampling")
    p.add_argument("--lr", type=float, default=d.lr)
    p.add_argument("--batch-size", type=int, default=d.batch_size)
    p.add_argument("--epochs", type=int, default=d.epochs)
    p.add_argument("--head-mode", choices=[m.value for m in HeadMode], default=d.head_mode.value)
    p.add_argument("--model-kind", choices=[k.value for k in ModelKind], default=d.model_kind.value)
    p.add_argument("--hidden", type=_csv(int), default=list(d.hidden), help="comma-separated layer widths")
    p.add_argument("--window-stride", type=int, default=d.window_stride)
    p.add_argument("--diffusion-steps", type=int, default=d.diffusion_steps)
    p.add_argument("--state-jitter", type=float, default=d.state_jitter, help="action-state noise in pixels")
    p.add_argument("--lr-schedule", choices=["constant", "cosine"], default=d.lr_schedule)


def _add_eval_flags(p):
    p.add_argument("--mode", choices=["offline", "online", "both"], default="both")
    p.add_argument("--exec-steps", type=int, default=1)
    p.add_argument("--step-budget", type=int, default=None)
    p.add_argument("--epsilon-match", type=float, default=20.0)
    p.add_argument("--tea-epsilon", type=float, default=20.0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dragflow", description="Flow-matching drag policy: data, training and evaluation.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="build and save a corpus")
    _add_common(g)
    g.add_argument("--per-domain-train", type=int, default=400)
    g.add_argument("--per-domain-eval", type=int, default=101)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--domains", type=_domains, default=[d.value for d in DRAG_DOMAINS],
                   help="comma-separated domains; add 'click' for a mixed click and drag corpus")
    g.add_argument("--density", type=int, default=80)
    g.add_argument("--sigma", type=float, default=0.0, help="trajectory jitter in pixels")
    g.add_argument("--raster", action="store_true", help="append the stroke occupancy raster")

    t = sub.add_parser("train", help="train a policy and save a checkpoint")
    _add_common(t)
    t.add_argument("--corpus", help="corpus directory (required)")
    t.add_argument("--domains", type=_domains, default=None, help="train on these domains only")
    t.add_argument("--seed", type=int, default=0)
    _add_train_flags(t)

    e = sub.add_parser("eval", help="score a checkpoint (or the ground-truth replay) on the eval split")
    _add_common(e)
    e.add_argument("--corpus", help="corpus directory (required)")
    src = e.add_mutually_exclusive_group()
    src.add_argument("--checkpoint")
    src.add_argument("--oracle", action="store_true", help="evaluate the ground-truth replay policy")
    e.add_argument("--domains", type=_domains, default=None)
    e.add_argument("--seed", type=int, default=0)
    _add_eval_flags(e)

    a = sub.add_parser("ablate", help="train and evaluate one ablation grid")
    _add_common(a)
    a.add_argument("--corpus", help="corpus directory (required)")
    a.add_argument("--axis", choices=[x.value for x in Axis], help="ablation axis (required)")
    a.add_argument("--seeds", type=_csv(int), default=[0, 1, 2])
    a.add_argument("--train-domains", type=_domains, default=None)
    a.add_argument("--eval-domains", type=_domains, default=None)
    a.add_argument("--mode", choices=["offline", "online", "both"], default="both")
    a.add_argument("--eval-seed", type=int, default=0)
    a.add_argument("--workers", type=int, default=1, help="parallel training processes")
    a.add_argument("--seed", type=int, default=0, help="names the run directory; models use --seeds")
    _add_train_flags(a)

    r = sub.add_parser("render", help="draw an episode with an optional predicted path as SVG")
    _add_common(r)
    r.add_argument("--corpus", help="corpus directory (required)")
    r.add_argument("--episode", help="episode id (required)")
    how = r.add_mutually_exclusive_group()
    how.add_argument("--trace", help="traces.jsonl written by eval; the episode's executed path is drawn")
    how.add_argument("--checkpoint", help="roll the checkpoint out on the episode and draw its path")
    how.add_argument("--oracle", action="store_true", help="draw the ground-truth replay rollout")
    r.add_argument("--exec-steps", type=int, default=1)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--output", help="SVG path (default: <run dir>/<episode>.svg)")
    return parser


def _file_defaults(parser: argparse.ArgumentParser, command: str, path: str) -> dict:
    """Values from the INI file for ``command``, converted with each flag's own type."""
    ini = configparser.ConfigParser()
    try:
        with open(path, encoding="utf-8") as fh:
            ini.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise UsageError(f"malformed config file {path}: {exc}") from None
    section = ini[command] if ini.has_section(command) else ini["DEFAULT"]
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[command]
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    out = {}
    for key, raw in section.items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in {"config", "command"}:
            raise UsageError(f"{path}: unknown key {key!r} for command {command!r}")
        if isinstance(action, argparse._StoreTrueAction):
            try:
                out[dest] = section.getboolean(key)
            except ValueError:
                raise UsageError(f"{path}: {key} must be a boolean") from None
            continue
        try:
            value = action.type(raw) if action.type else raw
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"{path}: bad value for {key}: {exc}") from None
        if action.choices is not None and value not in action.choices:
            raise UsageError(f"{path}: {key} must be one of {sorted(action.choices)}")
        out[dest] = value
    return out


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices[args.command]
        sub.set_defaults(**_file_defaults(parser, args.command, args.config))
        args = parser.parse_args(argv)
    for key in REQUIRED[args.command]:
        if getattr(args, key) is None:
            raise UsageError(f"{args.command}: --{key} is required (on the command line or in the config file)")
    return args


def resolved_config(args: argparse.Namespace) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in LOCATION_KEYS}


def train_config(args: argparse.Namespace) -> TrainConfig:
    known = {f.name for f in fields(TrainConfig)}
    try:
        return TrainConfig(**{k: v for k, v in vars(args).items() if k in known})
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n", encoding="utf-8")


def make_run_dir(args: argparse.Namespace) -> Path:
    if args.run_dir:
        run = Path(args.run_dir)
    else:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        base = Path(args.runs_root) / f"{args.command}-{stamp}-seed{args.seed}"
        run, k = base, 1
        while run.exists():
            run, k = base.with_name(f"{base.name}-{k}"), k + 1
    try:
        run.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot create run directory {run}: {exc.strerror}") from None
    _write_json(run / "config.json", resolved_config(args))
    return run


def _load_corpus(path):
    try:
        corpus = load_corpus(path)
    except CorpusError as exc:
        raise DataError(str(exc)) from None
    version = corpus.manifest.get("generator_version")
    if version != GENERATOR_VERSION:
        raise DataError(f"{path}: corpus generator version {version!r}, expected {GENERATOR_VERSION!r}")
    return corpus


def _select(corpus, split, domains):
    episodes = corpus.select(split, domains)
    if not episodes:
        raise DataError(f"no {split} episodes for domains {domains or 'all'}")
    return episodes


def _load_policy(args, corpus):
    """``(policy, checkpoint sha256 or None)``; checks the checkpoint against the corpus."""
    if getattr(args, "oracle", False) or not args.checkpoint:
        if not getattr(args, "oracle", False):
            raise UsageError("give --checkpoint or --oracle")
        return OracleReplay(), None
    try:
        model, info = load_checkpoint(args.checkpoint)
    except CheckpointError as exc:
        raise DataError(str(exc)) from None
    width = corpus.episodes[0].observations.shape[1]
    if model.obs_dim != width:
        raise DataError(f"checkpoint expects observations of width {model.obs_dim}, corpus has {width}")
    trained_on = info["extra"].get("generator_version")
    if trained_on is not None and trained_on != corpus.manifest.get("generator_version"):
        raise DataError(f"checkpoint was trained on generator {trained_on!r}, corpus is "
                        f"{corpus.manifest.get('generator_version')!r}")
    return model, info["sha256"]


def cmd_generate(args) -> int:
    if args.per_domain_train < 1 or args.per_domain_eval < 1:
        raise UsageError("per-domain counts must be at least 1")
    if args.density < 50:
        raise UsageError("density must be at least 50 waypoints")
    run = make_run_dir(args)
    try:
        corpus = build_corpus(args.per_domain_train, args.per_domain_eval, args.seed, args.domains,
                              args.density, args.sigma, args.raster)
    except CorpusBuildError as exc:
        raise DataError(str(exc)) from None
    try:
        save_corpus(corpus, run / "corpus")
    except OSError as exc:
        raise DataError(f"cannot write corpus: {exc}") from None
    print(f"{'domain':<16}{'train':>7}{'eval':>7}{'rejected':>10}")
    for name, counts in corpus.manifest["counts"].items():
        print(f"{name:<16}{counts['train']:>7}{counts['eval']:>7}{corpus.manifest['rejections'][name]:>10}")
    print(f"corpus: {run / 'corpus'}")
    return EXIT_OK


def cmd_train(args) -> int:
    config = train_config(args)
    corpus = _load_corpus(args.corpus)
    episodes = _select(corpus, "train", args.domains)
    run = make_run_dir(args)
    result = train(episodes, config)
    extra = {"generator_version": corpus.manifest.get("generator_version"),
             "schema_version": SCHEMA_VERSION, "corpus_seed": corpus.manifest.get("global_seed"),
             "train_episodes": len(episodes)}
    digest = save_checkpoint(result.model, run / "checkpoint.json", extra)
    _write_json(run / "curve.json", {"checkpoint_sha256": digest, "epoch_loss": result.curve})
    print(f"trained {config.model_kind.value} ({config.head_mode.value}) on {len(episodes)} episodes, "
          f"{result.model.n_params} parameters, final loss {result.curve[-1] if result.curve else float('nan'):.6f}")
    print(f"checkpoint: {run / 'checkpoint.json'} sha256 {digest}")
    return EXIT_OK


def cmd_eval(args) -> int:
    corpus = _load_corpus(args.corpus)
    policy, digest = _load_policy(args, corpus)
    episodes = _select(corpus, "eval", args.domains)
    if args.exec_steps < 1:
        raise UsageError("exec-steps must be at least 1")
    run = make_run_dir(args)
    try:
        report, traces = evaluate(policy, episodes, args.mode, args.exec_steps, args.seed, args.step_budget,
                                  args.epsilon_match, args.tea_epsilon,
                                  config={"checkpoint_sha256": digest, "policy": "oracle" if digest is None else
                                          getattr(policy, "kind", ModelKind.FLOW).value})
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    (run / "report.json").write_text(report.to_json(), encoding="utf-8")
    if traces:
        with open(run / "traces.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for t in traces:
                fh.write(json.dumps(t.to_record(), sort_keys=True, separators=(",", ":")) + "\n")
    print(report.table())
    print(f"report: {run / 'report.json'}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    if args.workers < 1:
        raise UsageError("workers must be at least 1")
    if not args.seeds:
        raise UsageError("at least one seed is required")
    base = train_config(args)
    corpus = _load_corpus(args.corpus)
    train_eps = _select(corpus, "train", args.train_domains)
    eval_eps = _select(corpus, "eval", args.eval_domains)
    run = make_run_dir(args)
    table = run_ablation(args.axis, train_eps, eval_eps, args.seeds, base, args.mode, args.eval_seed, args.workers)
    (run / "ablation.json").write_text(table.to_json(), encoding="utf-8")
    cells = run / "cells"
    cells.mkdir(exist_ok=True)
    for i, c in enumerate(table.cells):
        _write_json(cells / f"{i:02d}.json", c.to_record())
    text = table.table()
    (run / "table.txt").write_text(text + "\n", encoding="utf-8")
    print(text)
    print(f"ablation: {run / 'ablation.json'}")
    return EXIT_OK if not all(c.failed for c in table.cells) else EXIT_NUMERICAL


def _trace_points(path, episode_id):
    try:
        with open(path, encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if rec.get("episode_id") == episode_id:
                    return np.array(rec["executed"], dtype=float).reshape(-1, 3)
    except OSError as exc:
        raise DataError(f"cannot read trace file {path}: {exc.strerror}") from None
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise DataError(f"malformed trace file {path}: {exc}") from None
    raise DataError(f"{path}: no trace for episode {episode_id}")


def cmd_render(args) -> int:
    corpus = _load_corpus(args.corpus)
    matches = [ep for ep in corpus.episodes if ep.id == args.episode]
    if not matches:
        raise DataError(f"episode {args.episode} not in corpus {args.corpus}")
    episode = matches[0]
    predicted = None
    if args.trace:
        predicted = _trace_points(args.trace, episode.id)
    elif args.checkpoint or args.oracle:
        policy, _ = _load_policy(args, corpus)
        trace = online_eval(policy, [episode], args.exec_steps, args.seed)[0]
        predicted = np.array(trace.executed, dtype=float).reshape(-1, 3)
    run = make_run_dir(args)
    out = Path(args.output) if args.output else run / f"{episode.id}.svg"
    try:
        write_svg(out, episode, predicted)
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc.strerror}") from None
    print(f"svg: {out}")
    return EXIT_OK


COMMANDS = {"generate": cmd_generate, "train": cmd_train, "eval": cmd_eval, "ablate": cmd_ablate,
            "render": cmd_render}


def main(argv=None) -> int:
    try:
        args = parse_args(argv)
        logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"dragflow: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"dragflow: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as exc:
        print(f"dragflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
