"""``hmgame`` command line.

Exit codes: 0 success, 2 bad input, 3 output could not be written.
Set ``HMG_LOG`` to ``info`` or ``debug`` for diagnostics on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import hmm
from .errors import HMGError
from .experiments import export_result, load_scenario, run_scenario, shipped_scenario_path
from .game_core import game_from_dict, mixed_equilibrium_2x2, pure_nash_equilibria
from .hmg import hmg_from_dict, infer_transitions, to_hmm, type_posterior
from .hmm import TrainingConfig, model_from_dict, model_to_dict

EXIT_INPUT = 2
EXIT_IO = 3

log = logging.getLogger("hmgame")


class InputError(Exception):
    pass


class OutputError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _vec(xs) -> str:
    return "(" + ",".join(_fmt(float(x)) for x in xs) + ")"


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}:{e.colno}: invalid JSON: {e.msg}") from None
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None


def _load(path: str, parse):
    data = _read_json(path)
    try:
        return parse(data)
    except (HMGError, ValueError, TypeError, AttributeError) as e:
        raise InputError(f"{path}: {e}") from None


def _read_observations(path: str, labels) -> list[int]:
    """JSON list of indices or labels, or whitespace-separated tokens."""
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    try:
        tokens = json.loads(text)
        if not isinstance(tokens, list):
            raise InputError(f"{path}: expected a JSON list of observations")
    except json.JSONDecodeError:
        tokens = text.split()
    lookup = {str(lab): i for i, lab in enumerate(labels or ())}
    out = []
    for pos, tok in enumerate(tokens):
        if isinstance(tok, int) and not isinstance(tok, bool):
            out.append(tok)
        elif str(tok) in lookup:
            out.append(lookup[str(tok)])
        elif isinstance(tok, str) and tok.lstrip("-").isdigit():
            out.append(int(tok))
        else:
            raise InputError(f"{path}: observation {pos} ({tok!r}) is not a known symbol")
    if not out:
        raise InputError(f"{path}: no observations")
    return out


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text)
    except OSError as e:
        raise OutputError(f"{path}: {e.strerror}") from None


def cmd_solve_game(args) -> str:
    game = _load(args.game, game_from_dict)
    rows, cols = game.row_strategies, game.col_strategies
    lines = [f"pure: ({rows[r]},{cols[c]})" for r, c in pure_nash_equilibria(game)]
    if not lines:
        lines.append("pure: none")
    if args.mixed:
        try:
            eq = mixed_equilibrium_2x2(game)
        except HMGError as e:
            raise InputError(f"{args.game}: {e}") from None
        lines.append(f"mixed: p={_vec(eq.row.probabilities)} q={_vec(eq.col.probabilities)}")
        lines.append(f"values: row={_fmt(eq.row_value)} col={_fmt(eq.col_value)} kind={eq.kind}")
    return "\n".join(lines) + "\n"


def cmd_build_hmg(args) -> str:
    hmg = _load(args.hmg, hmg_from_dict)
    transitions = "uniform-init"
    if args.transitions:
        transitions = np.asarray(_read_json(args.transitions), dtype=float)
    try:
        model = to_hmm(hmg, transitions, seed=args.seed)
    except (HMGError, ValueError) as e:
        raise InputError(str(e)) from None
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def cmd_train(args) -> str:
    hmg = _load(args.hmg, hmg_from_dict)
    obs = _read_observations(args.observations, hmg.observation_labels)
    try:
        cfg = TrainingConfig(
            max_iterations=args.max_iterations,
            log_likelihood_tolerance=args.tolerance,
            clamp_emissions=True,
            seed=args.seed,
        )
        fit = infer_transitions(hmg, obs, cfg)
    except (HMGError, ValueError) as e:
        raise InputError(str(e)) from None
    log.info("trained for %d iterations, final log-likelihood %.6f", fit.iterations, fit.trace[-1])
    if args.trace:
        try:
            hmm.write_trace_csv(fit.trace, args.trace)
        except OSError as e:
            raise OutputError(f"{args.trace}: {e.strerror}") from None
    return json.dumps(model_to_dict(fit.model), indent=2) + "\n"


def cmd_predict(args) -> str:
    model = _load(args.model, model_from_dict)
    obs = _read_observations(args.observations, model.observation_labels)
    try:
        post = type_posterior(model, obs)
        nxt = hmm.predict_next_observation(model, obs)
    except (HMGError, ValueError) as e:
        raise InputError(str(e)) from None
    states = model.state_labels or [str(i) for i in range(model.n_states)]
    symbols = model.observation_labels or [str(i) for i in range(model.n_observations)]
    return (
        "posterior: " + " ".join(f"{s}={_fmt(p)}" for s, p in zip(states, post.probabilities)) + "\n"
        f"most_probable_type: {post.argmax_type}\n"
        "next_action: " + " ".join(f"{s}={_fmt(p)}" for s, p in zip(symbols, nxt)) + "\n"
        f"predicted: {symbols[int(np.argmax(nxt))]}\n"
    )


def cmd_distance(args) -> str:
    a = _load(args.model_a, model_from_dict)
    b = _load(args.model_b, model_from_dict)
    try:
        d = hmm.model_distance(a, b, args.length, args.seed)
    except (HMGError, ValueError) as e:
        raise InputError(str(e)) from None
    return f"distance: {_fmt(d)}\n"


def cmd_run_scenario(args) -> str:
    path = Path(args.scenario)
    if not path.exists() and shipped_scenario_path(args.scenario).exists():
        path = shipped_scenario_path(args.scenario)
    _read_json(str(path))
    try:
        config = load_scenario(path)
    except (HMGError, ValueError, OSError) as e:
        raise InputError(f"{path}: {e}") from None
    try:
        result = run_scenario(config, jobs=args.jobs)
    except HMGError as e:
        raise InputError(str(e)) from None
    log.info("scenario %s finished in %.1f s", config.name, result.runtime_seconds)
    try:
        export_result(result, args.out)
    except OSError as e:
        raise OutputError(str(e)) from None
    lines = [f"scenario: {config.name}"]
    for p, v in sorted(result.final_hit_rates.items(), key=lambda kv: -kv[1]):
        lines.append(f"{p.value}: {_fmt(v)}")
    lines.append(f"model_distance: {_fmt(result.model_distance)}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hmgame", description="Hidden Markov Game tools")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-game", help="pure and 2x2 mixed equilibria of a game file")
    p.add_argument("--game", required=True)
    p.add_argument("--mixed", action="store_true")
    p.set_defaults(func=cmd_solve_game)

    p = sub.add_parser("build-hmg", help="HMM (JSON) for a hidden Markov game")
    p.add_argument("--hmg", required=True)
    p.add_argument("--transitions", help="JSON file with an n x n transition table")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_hmg)

    p = sub.add_parser("train", help="fit type transitions to observed opponent actions")
    p.add_argument("--hmg", required=True)
    p.add_argument("--observations", required=True)
    p.add_argument("--max-iterations", type=int, default=200)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write the log-likelihood trace as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="type posterior and next-action distribution")
    p.add_argument("--model", required=True)
    p.add_argument("--observations", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("distance", help="symmetrised model distance between two HMM files")
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--length", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("run-scenario", help="run a scenario file (or a shipped name) and export results")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_run_scenario)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("HMG_LOG", "off").strip().lower()
    levels = {"info": logging.INFO, "debug": logging.DEBUG}
    if level in levels:
        logging.basicConfig(stream=sys.stderr, level=levels[level], format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else 0
    for name in ("length", "jobs", "max_iterations"):
        if getattr(args, name, 1) < 1:
            print(f"error: --{name.replace('_', '-')} must be positive", file=sys.stderr)
            return EXIT_INPUT
    try:
        text = args.func(args)
        _write_text(getattr(args, "out", None) if args.command in ("build-hmg", "train") else None, text)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except OutputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
