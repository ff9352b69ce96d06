"""Seeded tennis scenarios: simulate a server switching types, fit the model, score predictors."""

from __future__ import annotations

import csv
import json
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from . import hmm
from .errors import HMGError, ValidationError
from .game_core import BimatrixGame, StrategySet
from .hmg import HiddenMarkovGame, hmg_from_dict, hmg_to_dict, infer_transitions, to_hmm
from .hmm import HiddenMarkovModel, TrainingConfig
from .policies import (
    ALL_POLICIES,
    PolicyKind,
    RoundRecord,
    choose_own_action,
    make_policy,
    predict,
    update,
)

log = logging.getLogger(__name__)

SERVE = ("Open", "Center")
TYPES = ("Aggressive", "Moderate", "Defensive")

# (receiver payoff, server payoff); receiver picks the row, server the column
AGGRESSIVE_PAYOFFS = [[(0.65, 0.35), (0.89, 0.11)], [(0.98, 0.02), (0.15, 0.85)]]
MODERATE_PAYOFFS = [[(0.15, 0.85), (0.80, 0.20)], [(0.90, 0.10), (0.15, 0.85)]]
DEFENSIVE_PAYOFFS = [[(0.10, 0.90), (0.55, 0.45)], [(0.85, 0.15), (0.05, 0.95)]]

# Reconstructed generators; the original matrices were only published as figures.
AGGRESSIVE_TRANSITIONS = ((0.80, 0.15, 0.05), (0.20, 0.60, 0.20), (0.10, 0.30, 0.60))
DEFENSIVE_TRANSITIONS = ((0.60, 0.30, 0.10), (0.20, 0.60, 0.20), (0.05, 0.15, 0.80))

DEFAULT_SEEDS = tuple(range(10))
DEFAULT_TRAINING = TrainingConfig(clamp_emissions=True, clamp_initial=True)

Schedule = Literal["full", "checkpoint"]
HitRateMode = Literal["cumulative", "windowed"]


def tennis_hmg(prior: Sequence[float] | None = None) -> HiddenMarkovGame:
    """Server with three types; uniform prior unless one is given."""
    games = {
        t: BimatrixGame(StrategySet(SERVE), StrategySet(SERVE), np.array(p))
        for t, p in zip(TYPES, (AGGRESSIVE_PAYOFFS, MODERATE_PAYOFFS, DEFENSIVE_PAYOFFS))
    }
    if prior is None:
        prior = np.full(len(TYPES), 1.0 / len(TYPES))
    return HiddenMarkovGame(TYPES, games, prior)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    hmg: HiddenMarkovGame
    true_transitions: np.ndarray
    horizon: int = 10_000
    eval_interval: int = 200
    seeds: tuple[int, ...] = DEFAULT_SEEDS
    training: TrainingConfig = DEFAULT_TRAINING
    schedule: Schedule = "full"
    hit_rate_mode: HitRateMode = "cumulative"
    policies: tuple[PolicyKind, ...] = ALL_POLICIES

    def __post_init__(self):
        A = np.array(self.true_transitions, dtype=float)
        n = self.hmg.n_types
        if A.shape != (n, n):
            raise ValidationError(f"true_transitions must be {n}x{n}, got {A.shape}")
        if np.any(A < 0) or np.any(np.abs(A.sum(axis=1) - 1.0) > 1e-9):
            raise ValidationError("true_transitions must be row-stochastic")
        A.setflags(write=False)
        object.__setattr__(self, "true_transitions", A)
        if self.horizon < 1 or self.eval_interval < 1:
            raise ValidationError("horizon and eval_interval must be positive")
        if self.eval_interval > self.horizon:
            raise ValidationError("eval_interval must not exceed horizon")
        seeds = tuple(int(s) for s in self.seeds)
        if not seeds or any(s < 0 for s in seeds):
            raise ValidationError("seeds must be a non-empty list of non-negative integers")
        object.__setattr__(self, "seeds", seeds)
        if self.schedule not in ("full", "checkpoint"):
            raise ValidationError(f"unknown schedule {self.schedule!r}")
        if self.hit_rate_mode not in ("cumulative", "windowed"):
            raise ValidationError(f"unknown hit_rate_mode {self.hit_rate_mode!r}")
        object.__setattr__(self, "policies", tuple(PolicyKind(p) for p in self.policies))

    @property
    def n_checkpoints(self) -> int:
        return self.horizon // self.eval_interval

    @property
    def checkpoints(self) -> np.ndarray:
        return self.eval_interval * np.arange(1, self.n_checkpoints + 1)

    def generator(self) -> HiddenMarkovModel:
        return to_hmm(self.hmg, self.true_transitions)


def aggressive_scenario(**overrides) -> ScenarioConfig:
    return ScenarioConfig(name="aggressive", hmg=tennis_hmg(), true_transitions=AGGRESSIVE_TRANSITIONS, **overrides)


def defensive_scenario(**overrides) -> ScenarioConfig:
    return ScenarioConfig(name="defensive", hmg=tennis_hmg(), true_transitions=DEFENSIVE_TRANSITIONS, **overrides)


@dataclass
class SeedRun:
    seed: int
    hit_rates: dict[PolicyKind, np.ndarray]
    trained_model: HiddenMarkovModel
    trace: list[float]
    model_distance: float
    records: dict[PolicyKind, list[RoundRecord]] | None = None


@dataclass
class ScenarioResult:
    config: ScenarioConfig
    runs: list[SeedRun]
    runtime_seconds: float = 0.0
    series: dict[PolicyKind, np.ndarray] = field(init=False)

    def __post_init__(self):
        self.series = {p: np.vstack([r.hit_rates[p] for r in self.runs]) for p in self.config.policies}

    @property
    def final_hit_rates(self) -> dict[PolicyKind, float]:
        return {p: float(s[:, -1].mean()) for p, s in self.series.items()}

    @property
    def final_hit_rate_std(self) -> dict[PolicyKind, float]:
        return {p: float(s[:, -1].std()) for p, s in self.series.items()}

    @property
    def model_distances(self) -> list[float]:
        return [r.model_distance for r in self.runs]

    @property
    def model_distance(self) -> float:
        return float(np.mean(self.model_distances))

    @property
    def trained_model(self) -> HiddenMarkovModel:
        return self.runs[0].trained_model

    def ranking(self) -> list[PolicyKind]:
        rates = self.final_hit_rates
        return sorted(rates, key=lambda p: -rates[p])


def _streams(seed: int, training_seed: int) -> tuple[int, int, int, int]:
    # independent sub-seeds for sampling, EM initialisation, policies, distance
    state = np.random.SeedSequence([training_seed, seed]).generate_state(4)
    return tuple(int(x) for x in state)


def _checkpoint_rates(hits: np.ndarray, config: ScenarioConfig) -> np.ndarray:
    k, w = config.n_checkpoints, config.eval_interval
    if config.hit_rate_mode == "cumulative":
        return np.cumsum(hits)[config.checkpoints - 1] / config.checkpoints
    return hits[: k * w].reshape(k, w).mean(axis=1)


def run_seed(config: ScenarioConfig, seed: int, keep_records: bool = False) -> SeedRun:
    sample_seed, init_seed, policy_seed, distance_seed = _streams(seed, config.training.seed)
    generator = config.generator()
    obs, _ = hmm.sample(generator, config.horizon, sample_seed)
    training = TrainingConfig(
        max_iterations=config.training.max_iterations,
        log_likelihood_tolerance=config.training.log_likelihood_tolerance,
        clamp_emissions=True,
        clamp_initial=True,
        seed=init_seed,
    )
    hmg = config.hmg

    def train(prefix):
        try:
            return infer_transitions(hmg, prefix, training)
        except HMGError as e:
            raise type(e)(f"seed {seed}, {len(prefix)} rounds: {e}") from e

    if config.schedule == "full":
        fit = train(obs)
        model = fit.model
    else:
        fit = None
        model = to_hmm(hmg, "uniform-init", seed=init_seed)

    n_actions = generator.n_observations
    policy_rngs = np.random.SeedSequence(policy_seed).spawn(len(config.policies))
    states = {
        kind: make_policy(
            kind,
            n_actions,
            seed=int(ss.generate_state(1)[0]),
            model=model if kind.needs_model else None,
        )
        for kind, ss in zip(config.policies, policy_rngs)
    }
    hits = {kind: np.zeros(config.horizon, dtype=np.int8) for kind in config.policies}
    records = {kind: [] for kind in config.policies} if keep_records else None

    for t in range(config.horizon):
        if config.schedule == "checkpoint" and t > 0 and t % config.eval_interval == 0:
            fit = train(obs[:t])
            model = fit.model
            for kind, st in states.items():
                if kind.needs_model:
                    st.attach_model(model)
        actual = int(obs[t])
        for kind, st in states.items():
            guess = predict(st)
            rec = RoundRecord(t, actual, choose_own_action(st, hmg, guess), guess)
            update(st, rec)
            hits[kind][t] = guess == actual
            if records is not None:
                records[kind].append(rec)

    if config.schedule == "checkpoint":
        fit = train(obs)
    distance = hmm.model_distance(generator, fit.model, config.horizon, distance_seed)
    log.info("%s seed %d: distance %.6f after %d EM updates", config.name, seed, distance, fit.iterations)
    return SeedRun(
        seed=seed,
        hit_rates={k: _checkpoint_rates(h, config) for k, h in hits.items()},
        trained_model=fit.model,
        trace=fit.trace,
        model_distance=distance,
        records=records,
    )


def _run_seed_star(args):
    return run_seed(*args)


def run_scenario(config: ScenarioConfig, jobs: int = 1, keep_records: bool = False) -> ScenarioResult:
    """Run every seed (optionally in worker processes) and merge in seed order."""
    start = time.perf_counter()
    work = [(config, s, keep_records) for s in config.seeds]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            runs = list(pool.map(_run_seed_star, work))
    else:
        runs = [run_seed(*w) for w in work]
    return ScenarioResult(config, runs, runtime_seconds=time.perf_counter() - start)


# -- files -------------------------------------------------------------------


def _training_from_dict(data: dict | None) -> TrainingConfig:
    if not data:
        return DEFAULT_TRAINING
    allowed = {"max_iterations", "log_likelihood_tolerance", "clamp_emissions", "clamp_initial", "seed"}
    unknown = set(data) - allowed
    if unknown:
        raise ValidationError(f"unknown training keys {sorted(unknown)}")
    merged = {
        "max_iterations": DEFAULT_TRAINING.max_iterations,
        "log_likelihood_tolerance": DEFAULT_TRAINING.log_likelihood_tolerance,
        "clamp_emissions": True,
        "clamp_initial": True,
        "seed": 0,
    }
    merged.update(data)
    return TrainingConfig(**merged)


def _training_to_dict(cfg: TrainingConfig) -> dict:
    return {
        "max_iterations": cfg.max_iterations,
        "log_likelihood_tolerance": cfg.log_likelihood_tolerance,
        "clamp_emissions": cfg.clamp_emissions,
        "clamp_initial": cfg.clamp_initial,
        "seed": cfg.seed,
    }


def scenario_from_dict(data: dict, base_dir: str | os.PathLike | None = None) -> ScenarioConfig:
    try:
        hmg_spec = data["hmg"]
        if isinstance(hmg_spec, str):
            path = Path(hmg_spec)
            if not path.is_absolute() and base_dir is not None:
                path = Path(base_dir) / path
            with open(path) as fh:
                hmg_spec = json.load(fh)
        return ScenarioConfig(
            name=str(data["name"]),
            hmg=hmg_from_dict(hmg_spec),
            true_transitions=data["true_transitions"],
            horizon=int(data.get("horizon", 10_000)),
            eval_interval=int(data.get("eval_interval", 200)),
            seeds=tuple(data.get("seeds", DEFAULT_SEEDS)),
            training=_training_from_dict(data.get("training")),
            schedule=data.get("schedule", "full"),
            hit_rate_mode=data.get("hit_rate_mode", "cumulative"),
            policies=tuple(data.get("policies", [p.value for p in ALL_POLICIES])),
        )
    except KeyError as e:
        raise ValidationError(f"scenario is missing key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"malformed scenario: {e}") from None


def scenario_to_dict(config: ScenarioConfig) -> dict:
    return {
        "name": config.name,
        "hmg": hmg_to_dict(config.hmg),
        "true_transitions": config.true_transitions.tolist(),
        "horizon": config.horizon,
        "eval_interval": config.eval_interval,
        "seeds": list(config.seeds),
        "training": _training_to_dict(config.training),
        "schedule": config.schedule,
        "hit_rate_mode": config.hit_rate_mode,
        "policies": [p.value for p in config.policies],
    }


def load_scenario(path: str | os.PathLike) -> ScenarioConfig:
    path = Path(path)
    with open(path) as fh:
        data = json.load(fh)
    return scenario_from_dict(data, base_dir=path.parent)


def shipped_scenario_path(name: str) -> Path:
    return Path(__file__).parent / "data" / f"{name}.json"


def summary_dict(result: ScenarioResult) -> dict:
    cfg = result.config
    return {
        "name": cfg.name,
        "horizon": cfg.horizon,
        "eval_interval": cfg.eval_interval,
        "seeds": list(cfg.seeds),
        "schedule": cfg.schedule,
        "hit_rate_mode": cfg.hit_rate_mode,
        "final_hit_rates": {p.value: v for p, v in result.final_hit_rates.items()},
        "final_hit_rate_std": {p.value: v for p, v in result.final_hit_rate_std.items()},
        "ranking": [p.value for p in result.ranking()],
        "model_distance": result.model_distance,
        "model_distances": result.model_distances,
    }


def export_result(result: ScenarioResult, directory: str | os.PathLike) -> list[Path]:
    """Write ``hit_rates.csv``, ``summary.json``, ``trained_model.json`` and ``hit_rates.svg``."""
    out = Path(directory)
    try:
        out.mkdir(parents=True, exist_ok=True)
        paths = [out / n for n in ("hit_rates.csv", "summary.json", "trained_model.json", "hit_rates.svg")]
        with open(paths[0], "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["checkpoint", "seed", "policy", "hit_rate"])
            for ci, checkpoint in enumerate(result.config.checkpoints):
                for si, seed in enumerate(result.config.seeds):
                    for p, s in result.series.items():
                        w.writerow([int(checkpoint), seed, p.value, repr(float(s[si, ci]))])
        with open(paths[1], "w") as fh:
            json.dump(summary_dict(result), fh, indent=2)
            fh.write("\n")
        with open(paths[2], "w") as fh:
            json.dump(hmm.model_to_dict(result.trained_model), fh, indent=2)
            fh.write("\n")
        _write_chart(result, paths[3])
    except OSError as e:
        raise OSError(e.errno, f"cannot write results to {out}: {e.strerror}", e.filename) from e
    return paths


def _write_chart(result: ScenarioResult, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "hmgame", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(7, 4))
        x = result.config.checkpoints
        for p, s in result.series.items():
            ax.plot(x, s.mean(axis=0), label=p.value)
        ax.set_xlabel("rounds")
        ax.set_ylabel(f"{result.config.hit_rate_mode} hit rate")
        ax.set_title(result.config.name)
        ax.set_ylim(0, 1)
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
