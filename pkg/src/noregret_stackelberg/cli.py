"""Command-line front end.

Exit codes: 0 success, 1 user or config error, 2 size cap exceeded,
3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .equilibria import mixed_stackelberg_values, pure_stackelberg_values, stackelberg_report
from .errors import (
    InternalInvariantError,
    InvalidConfigurationError,
    InvalidInputError,
    ParseError,
    UnsupportedSizeError,
)
from .game_model import MixedStrategy
from .games import builtin_game
from .gamefile import load_config, load_game
from .learners import SCRIPTED_CE1, SCRIPTED_CE2, LearnerPolicy
from .simulation import (
    OptimizerPolicy,
    compute_metrics,
    default_checkpoints,
    metrics_csv,
    run,
    trajectory_csv,
    verify_guarantee,
)

EXIT_OK, EXIT_USER, EXIT_CAP, EXIT_INTERNAL = 0, 1, 2, 3


def _emit(text: str, path=None, out=None):
    if path is None:
        (out or sys.stdout).write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _pretty(x: float) -> str:
    f = Fraction(x).limit_denominator(1000)
    if abs(float(f) - x) <= 1e-9:
        return str(f)
    return f"{x:.6g}"


def _relation(a: float, b: float, tol: float = 1e-9) -> str:
    if a < b - tol:
        return "<"
    if a > b + tol:
        return ">"
    return "="


def cmd_values(args, out) -> int:
    game = load_game(args.game)
    report = stackelberg_report(game, args.grid)
    text = json.dumps(report.to_dict(), indent=2, sort_keys=False) + "\n"
    _emit(text, args.output, out)
    return EXIT_OK


def cmd_counterexample(args, out) -> int:
    which = args.which
    game = builtin_game(which)
    kind = SCRIPTED_CE1 if which == "ce1" else SCRIPTED_CE2
    alpha = MixedStrategy(game.num_players - 1, [1.0])
    traj = run(game, OptimizerPolicy.fixed(alpha), [LearnerPolicy(kind)] * 2, args.rounds, 0)
    series = compute_metrics(traj, alpha, default_checkpoints(args.rounds))
    if args.out_dir is not None:
        d = Path(args.out_dir)
        _emit(trajectory_csv([traj]), d / f"{which}_trajectory.csv")
        _emit(metrics_csv([(0, series)], game.num_players - 1), d / f"{which}_metrics.csv")
    total = Fraction(float(traj.optimizer_payoffs().sum()))
    avg = total / args.rounds
    if which == "ce1":
        name, value = "V_pure", pure_stackelberg_values(game)[0].value
    else:
        name, value = "v_mixed", mixed_stackelberg_values(game)[1].value
    distinct = sorted({traj.labeled(t) for t in range(traj.horizon)})
    out.write(f"rounds {traj.horizon}; distinct profiles: "
              + ", ".join("(" + ",".join(p) + ")" for p in distinct) + "\n")
    out.write(f"cumulative optimizer utility {_pretty(float(total))}\n")
    avg_s = str(avg) if avg.denominator <= 1000 else f"{float(avg):.6g}"
    out.write(f"avg {avg_s} {_relation(float(avg), value)} {name} {_pretty(value)}\n")
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    cfg = load_config(args.config, "simulate")
    game = cfg.game
    if cfg.optimizer.kind == "fixed-mixed":
        alpha = cfg.optimizer.alpha
    else:
        # metrics of a scripted optimizer use its empirical action frequencies
        counts = [0] * game.shape[-1]
        for a in cfg.optimizer.sequence:
            counts[a] += 1
        alpha = MixedStrategy(game.num_players - 1, [c / sum(counts) for c in counts])
    checkpoints = cfg.checkpoints or default_checkpoints(cfg.rounds)
    runs, trajs = [], []
    for seed in cfg.seeds:
        traj = run(game, cfg.optimizer, cfg.learners, cfg.rounds, seed)
        runs.append((seed, compute_metrics(traj, alpha, checkpoints)))
        if "trajectory_csv" in cfg.outputs:
            trajs.append(traj)
    _emit(metrics_csv(runs, game.num_players - 1), cfg.outputs.get("metrics_csv"), out)
    if trajs:
        _emit(trajectory_csv(trajs), cfg.outputs["trajectory_csv"])
    return EXIT_OK


def cmd_guarantee(args, out) -> int:
    cfg = load_config(args.config, "guarantee")
    rep = verify_guarantee(
        cfg.game, cfg.learners[0], cfg.rounds, cfg.seeds, cfg.epsilon, cfg.grid_resolution
    )
    lines = [
        f"learners: {cfg.learners[0].kind}",
        f"benchmark {rep.benchmark} = {rep.value:.12g} at alpha = "
        + "[" + ", ".join(f"{a:.6g}" for a in rep.alpha) + "]",
        f"epsilon {rep.epsilon:g}, rounds {rep.horizon}, seeds {len(rep.seeds)}",
    ]
    for seed, avg, dist in zip(rep.seeds, rep.averages, rep.final_distances):
        lines.append(f"  seed {seed}: average payoff {avg:.12g}, final distance {dist:.6g}")
    lines.append(
        f"expected-value bound (mean over seeds): {rep.mean:.12g} >= {rep.threshold:.12g}: "
        + ("PASS" if rep.expected_ok else "FAIL")
    )
    lines.append(
        f"pathwise bound (min over seeds): {rep.minimum:.12g} >= {rep.threshold:.12g}: "
        + ("PASS" if rep.pathwise_ok else "FAIL")
    )
    _emit("\n".join(lines) + "\n", cfg.outputs.get("report"), out)
    if "report" in cfg.outputs:
        out.write("\n".join(lines[-2:]) + "\n")
    return EXIT_OK


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _resolution(text):
    v = float(text)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="nrstack",
        description="Stackelberg values and repeated play against no-regret learners.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("values", help="compute the six Stackelberg values of a game")
    v.add_argument("game", help="game file path or builtin:<name>")
    v.add_argument("--grid", type=_resolution, default=1 / 50, help="grid step over the optimizer simplex")
    v.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
    v.set_defaults(func=cmd_values)

    s = sub.add_parser("simulate", help="run a simulation config and write metrics CSV")
    s.add_argument("config")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("counterexample", help="replay a built-in counterexample with scripted learners")
    c.add_argument("which", choices=["ce1", "ce2"])
    c.add_argument("--rounds", type=_positive_int, required=True)
    c.add_argument("--out-dir", help="directory for trajectory and metrics CSVs")
    c.set_defaults(func=cmd_counterexample)

    g = sub.add_parser("guarantee", help="check the value guarantee against regret-matching learners")
    g.add_argument("config")
    g.set_defaults(func=cmd_guarantee)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UnsupportedSizeError as exc:
        print(f"error: unsupported size: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (ParseError, InvalidInputError, InvalidConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except InternalInvariantError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
