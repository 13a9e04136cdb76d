"""YAML game files and experiment configs with line-anchored errors.

Game file::

    players: 3
    actions:
      - [T, B]
      - [L, R]
      - [E]
    utilities:          # one flat array per player, last player fastest
      - [1, 0, 0, 1]
      - [1, 0, 0, 1]
      - [0, 1, -1, 0]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import InvalidConfigurationError, InvalidInputError, ParseError
from .game_model import GameSpec
from .games import BUILTIN_GAMES, builtin_game

BUILTIN_PREFIX = "builtin:"


class Node:
    """A parsed YAML value that remembers where it came from."""

    __slots__ = ("value", "line", "column")

    def __init__(self, value, line, column):
        self.value = value
        self.line = line
        self.column = column


def _wrap(node, constructor):
    line, col = node.start_mark.line + 1, node.start_mark.column + 1
    if isinstance(node, yaml.MappingNode):
        out = {}
        for k, v in node.value:
            key = constructor.construct_object(k, deep=True)
            out[key] = _wrap(v, constructor)
        return Node(out, line, col)
    if isinstance(node, yaml.SequenceNode):
        return Node([_wrap(v, constructor) for v in node.value], line, col)
    return Node(constructor.construct_object(node, deep=True), line, col)


def load_anchored(text: str, source=None) -> Node:
    loader = yaml.SafeLoader(text)
    try:
        root = loader.get_single_node()
        if root is None:
            raise ParseError("empty document", 1, 1, source)
        return _wrap(root, loader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise ParseError(f"YAML syntax error: {exc.problem or exc}", line, col, source) from None
    finally:
        loader.dispose()


class Reader:
    """Typed accessors raising :class:`ParseError` at the offending node."""

    def __init__(self, source=None):
        self.source = source

    def fail(self, node: Node, message: str):
        raise ParseError(message, node.line, node.column, self.source)

    def mapping(self, node: Node, what="value") -> dict:
        if not isinstance(node.value, dict):
            self.fail(node, f"{what} must be a mapping")
        return node.value

    def require(self, mapping_node: Node, key: str) -> Node:
        m = self.mapping(mapping_node)
        if key not in m:
            self.fail(mapping_node, f"missing required field '{key}'")
        return m[key]

    def seq(self, node: Node, what="value") -> list:
        if not isinstance(node.value, list):
            self.fail(node, f"{what} must be a list")
        return node.value

    def integer(self, node: Node, what="value", minimum=None) -> int:
        v = node.value
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(node, f"{what} must be an integer")
        if minimum is not None and v < minimum:
            self.fail(node, f"{what} must be >= {minimum}")
        return v

    def real(self, node: Node, what="value") -> float:
        v = node.value
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            self.fail(node, f"{what} must be a finite real number")
        return float(v)

    def string(self, node: Node, what="value") -> str:
        if not isinstance(node.value, (str, int)) or isinstance(node.value, bool):
            self.fail(node, f"{what} must be a string")
        return str(node.value)

    def reals(self, node: Node, what="value") -> list:
        return [self.real(x, f"entry of {what}") for x in self.seq(node, what)]

    def stochastic(self, node: Node, size: int, what="probability vector") -> np.ndarray:
        p = np.array(self.reals(node, what))
        if p.size != size:
            self.fail(node, f"{what} has {p.size} entries, expected {size}")
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            self.fail(node, f"{what} is not stochastic (entries must be >= 0 and sum to 1)")
        return p / p.sum()


def parse_game(text: str, source=None) -> GameSpec:
    r = Reader(source)
    root = load_anchored(text, source)
    fields = r.mapping(root, "game file")
    for key, val in fields.items():
        if key not in ("players", "actions", "utilities"):
            r.fail(val, f"unknown field '{key}'")
    n = r.integer(r.require(root, "players"), "players", minimum=2)
    actions_node = r.require(root, "actions")
    actions = r.seq(actions_node, "actions")
    if len(actions) != n:
        r.fail(actions_node, f"actions lists {len(actions)} players, expected {n}")
    labels = []
    for i, a in enumerate(actions):
        names = [r.string(x, f"action label of player {i + 1}") for x in r.seq(a, "action list")]
        if not names:
            r.fail(a, f"player {i + 1} has no actions")
        if len(set(names)) != len(names):
            r.fail(a, f"player {i + 1} has duplicate action labels")
        labels.append(names)
    size = int(np.prod([len(a) for a in labels]))
    util_node = r.require(root, "utilities")
    utils = r.seq(util_node, "utilities")
    if len(utils) != n:
        r.fail(util_node, f"utilities has {len(utils)} arrays, expected {n}")
    rows = []
    for i, u in enumerate(utils):
        row = r.reals(u, f"utilities of player {i + 1}")
        if len(row) != size:
            r.fail(u, f"utilities of player {i + 1} has length {len(row)}, expected {size}")
        rows.append(row)
    try:
        return GameSpec.from_flat(labels, rows)
    except InvalidInputError as exc:
        r.fail(root, str(exc))


def dump_game(game: GameSpec) -> str:
    doc = {
        "players": game.num_players,
        "actions": [list(a) for a in game.action_labels],
        "utilities": [game.flat_utilities(i).tolist() for i in range(game.num_players)],
    }
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None)


def load_game(ref: str, base_dir=None) -> GameSpec:
    """Load ``builtin:<name>`` or a game file path (relative to ``base_dir``)."""
    if ref.startswith(BUILTIN_PREFIX):
        name = ref[len(BUILTIN_PREFIX):]
        if name not in BUILTIN_GAMES:
            raise ParseError(f"unknown built-in game {name!r}; choose from {sorted(BUILTIN_GAMES)}")
        return builtin_game(name)
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = Path(base_dir) / path
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read game file: {exc.strerror}", source=str(path)) from None
    return parse_game(text, str(path))


# -- experiment configs ----------------------------------------------------

MODES = ("simulate", "values", "counterexample", "guarantee")


@dataclass
class ExperimentConfig:
    game: GameSpec
    mode: str
    learners: list = field(default_factory=list)
    optimizer: object = None
    rounds: int | None = None
    seeds: tuple = ()
    epsilon: float | None = None
    grid_resolution: float = 1 / 50
    checkpoints: list | None = None
    outputs: dict = field(default_factory=dict)
    base_dir: Path | None = None


def parse_config(text: str, source=None, base_dir=None, expected_mode=None) -> ExperimentConfig:
    from .game_model import MixedStrategy
    from .learners import LearnerPolicy
    from .simulation import OptimizerPolicy

    r = Reader(source)
    root = load_anchored(text, source)
    fields = r.mapping(root, "config")
    known = {"game", "mode", "learners", "optimizer", "rounds", "seeds", "epsilon",
             "grid_resolution", "checkpoints", "output"}
    for key, val in fields.items():
        if key not in known:
            r.fail(val, f"unknown field '{key}'")

    mode = expected_mode
    if "mode" in fields:
        mode = r.string(fields["mode"], "mode")
        if mode not in MODES:
            r.fail(fields["mode"], f"mode must be one of {MODES}")
        if expected_mode is not None and mode != expected_mode:
            r.fail(fields["mode"], f"config is for mode '{mode}', not '{expected_mode}'")
    if mode is None:
        r.fail(root, "missing required field 'mode'")

    game_node = r.require(root, "game")
    try:
        game = load_game(r.string(game_node, "game"), base_dir)
    except ParseError as exc:
        if exc.line is None and exc.source is None:
            r.fail(game_node, exc.message)
        raise
    cfg = ExperimentConfig(game=game, mode=mode, base_dir=base_dir)
    n = game.num_players

    if "grid_resolution" in fields:
        res = r.real(fields["grid_resolution"], "grid_resolution")
        if not 0 < res <= 1:
            r.fail(fields["grid_resolution"], "grid_resolution must be in (0, 1]")
        cfg.grid_resolution = res

    if mode in ("simulate", "guarantee"):
        cfg.rounds = r.integer(r.require(root, "rounds"), "rounds", minimum=1)
        seeds_node = r.require(root, "seeds")
        cfg.seeds = tuple(r.integer(s, "seed", minimum=0) for s in r.seq(seeds_node, "seeds"))
        if not cfg.seeds:
            r.fail(seeds_node, "seeds must be nonempty")

        learners_node = r.require(root, "learners")
        blocks = [learners_node] if isinstance(learners_node.value, dict) else r.seq(learners_node, "learners")
        if len(blocks) == 1:
            blocks = blocks * (n - 1)
        if len(blocks) != n - 1:
            r.fail(learners_node, f"expected 1 or {n - 1} learner blocks, got {len(blocks)}")
        for i, b in enumerate(blocks):
            m = r.mapping(b, "learner block")
            for key, val in m.items():
                if key not in ("kind", "tie_break", "mu"):
                    r.fail(val, f"unknown learner field '{key}'")
            kw = {"kind": r.string(r.require(b, "kind"), "kind")}
            if "tie_break" in m:
                kw["tie_break"] = r.string(m["tie_break"], "tie_break")
            if "mu" in m:
                kw["mu"] = r.real(m["mu"], "mu")
            try:
                pol = LearnerPolicy(**kw)
                pol.validate(game, i)
            except InvalidConfigurationError as exc:
                r.fail(b, str(exc))
            cfg.learners.append(pol)

    if mode == "simulate":
        opt_node = r.require(root, "optimizer")
        om = r.mapping(opt_node, "optimizer")
        kind = r.string(r.require(opt_node, "kind"), "optimizer kind")
        k = game.shape[-1]
        if kind == "fixed-mixed":
            alpha = r.stochastic(r.require(opt_node, "alpha"), k, "alpha")
            cfg.optimizer = OptimizerPolicy.fixed(MixedStrategy(n - 1, alpha))
        elif kind == "scripted":
            seq_node = r.require(opt_node, "sequence")
            seq = []
            for x in r.seq(seq_node, "sequence"):
                try:
                    seq.append(game.action_index(n - 1, x.value))
                except InvalidInputError as exc:
                    r.fail(x, str(exc))
            if not seq:
                r.fail(seq_node, "sequence must be nonempty")
            cfg.optimizer = OptimizerPolicy.scripted(seq)
        else:
            r.fail(om["kind"], "optimizer kind must be 'fixed-mixed' or 'scripted'")
        if "checkpoints" in fields:
            cps = [r.integer(c, "checkpoint", minimum=1) for c in r.seq(fields["checkpoints"], "checkpoints")]
            if any(c > cfg.rounds for c in cps):
                r.fail(fields["checkpoints"], "checkpoints must not exceed rounds")
            cfg.checkpoints = sorted(set(cps))

    if mode == "guarantee":
        eps_node = r.require(root, "epsilon")
        cfg.epsilon = r.real(eps_node, "epsilon")
        if not cfg.epsilon > 0:
            r.fail(eps_node, "epsilon must be positive")
        if len(set(cfg.learners)) != 1:
            r.fail(r.require(root, "learners"), "guarantee mode needs one learner block shared by all learners")
        if cfg.learners[0].scripted:
            r.fail(r.require(root, "learners"),
                   "guarantees concern regret-matching algorithms; scripted learners are refused")

    if "output" in fields:
        om = r.mapping(fields["output"], "output")
        for key, val in om.items():
            if key not in ("metrics_csv", "trajectory_csv", "report"):
                r.fail(val, f"unknown output field '{key}'")
            path = Path(r.string(val, key))
            if base_dir is not None and not path.is_absolute():
                path = Path(base_dir) / path
            cfg.outputs[key] = path
    return cfg


def load_config(path, expected_mode=None) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", source=str(path)) from None
    return parse_config(text, str(path), path.parent, expected_mode)
