"""Hidden Markov Games reduced to HMMs.

An informed player (the column player) switches between types along a hidden
Markov chain; each type plays the column half of its own game's equilibrium.
The uninformed row player observes only the column actions. One hidden state
is used per type, and emission rows are the types' equilibrium column mixes.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

import numpy as np

from . import hmm
from .errors import DegenerateGame, DimensionMismatch, ValidationError
from .game_core import BimatrixGame, StrategySet, game_from_dict, game_to_dict, mixed_equilibrium_2x2
from .hmm import HiddenMarkovModel, TrainingConfig

_PRIOR_ATOL = 1e-12
_TIE_ATOL = 1e-12


@dataclass(frozen=True, eq=False)
class HiddenMarkovGame:
    informed_types: tuple[str, ...]
    type_games: Mapping[str, BimatrixGame]
    prior: np.ndarray

    def __post_init__(self):
        types = tuple(str(t) for t in self.informed_types)
        if not types:
            raise ValidationError("a hidden Markov game needs at least one type")
        if len(set(types)) != len(types):
            raise ValidationError("type labels must be unique")
        missing = [t for t in types if t not in self.type_games]
        if missing:
            raise ValidationError(f"no game given for types {missing}")
        games = {t: self.type_games[t] for t in types}
        first = games[types[0]]
        for t, g in games.items():
            if g.row_strategies != first.row_strategies or g.col_strategies != first.col_strategies:
                raise ValidationError(f"game for type {t!r} uses different strategy sets")
        prior = np.array(self.prior, dtype=float)
        if prior.shape != (len(types),):
            raise DimensionMismatch(f"prior needs {len(types)} entries, got shape {prior.shape}")
        if np.any(prior < 0) or abs(prior.sum() - 1.0) > _PRIOR_ATOL:
            raise ValidationError("prior must be a probability distribution")
        prior.setflags(write=False)
        object.__setattr__(self, "informed_types", types)
        object.__setattr__(self, "type_games", games)
        object.__setattr__(self, "prior", prior)

    @property
    def n_types(self) -> int:
        return len(self.informed_types)

    @property
    def observation_labels(self) -> StrategySet:
        """The informed player's strategies, which are what the row player observes."""
        return self.type_games[self.informed_types[0]].col_strategies

    @property
    def own_strategies(self) -> StrategySet:
        return self.type_games[self.informed_types[0]].row_strategies

    @cached_property
    def payoff_stack(self) -> np.ndarray:
        """Row-player payoffs, shape ``(n_types, n_rows, n_cols)``."""
        stack = np.stack([self.type_games[t].row_payoffs for t in self.informed_types])
        stack.setflags(write=False)
        return stack


@dataclass(frozen=True)
class TypePosterior:
    probabilities: np.ndarray
    argmax_type: str

    @property
    def index(self) -> int:
        return int(np.argmax(self.probabilities))


def build_emission_matrix(hmg: HiddenMarkovGame) -> np.ndarray:
    rows = []
    for t in hmg.informed_types:
        try:
            eq = mixed_equilibrium_2x2(hmg.type_games[t])
        except DegenerateGame as e:
            raise DegenerateGame(f"type {t!r}: {e}") from e
        rows.append(eq.col.probabilities)
    B = np.array(rows)
    B.setflags(write=False)
    return B


def to_hmm(
    hmg: HiddenMarkovGame,
    transitions: np.ndarray | str = "uniform-init",
    seed: int = 0,
    noise: float = 0.05,
) -> HiddenMarkovModel:
    n = hmg.n_types
    if isinstance(transitions, str):
        if transitions != "uniform-init":
            raise ValidationError(f"unknown transition initialisation {transitions!r}")
        A = hmm.uniform_transitions(n, seed, noise)
    else:
        A = np.asarray(transitions, dtype=float)
        if A.shape != (n, n):
            raise DimensionMismatch(f"transitions must be {n}x{n} for {n} types, got {A.shape}")
    return HiddenMarkovModel(
        transitions=A,
        emissions=build_emission_matrix(hmg),
        initial=hmg.prior,
        state_labels=hmg.informed_types,
        observation_labels=tuple(hmg.observation_labels),
    )


def infer_transitions(
    hmg: HiddenMarkovGame,
    obs: Sequence[int],
    config: TrainingConfig = TrainingConfig(),
    initial_transitions: np.ndarray | str = "uniform-init",
) -> hmm.TrainingResult:
    """Fit the type transition table to observed opponent actions.

    Emissions and the initial distribution stay at the values derived from
    the game; only the transitions are re-estimated.
    """
    start = to_hmm(hmg, initial_transitions, seed=config.seed)
    cfg = TrainingConfig(
        max_iterations=config.max_iterations,
        log_likelihood_tolerance=config.log_likelihood_tolerance,
        clamp_emissions=True,
        clamp_initial=True,
        seed=config.seed,
    )
    return hmm.baum_welch(obs, hmg.n_types, start, cfg)


def type_posterior(model: HiddenMarkovModel, obs: Sequence[int]) -> TypePosterior:
    probs = hmm.filter(model, obs)
    labels = model.state_labels or tuple(str(i) for i in range(model.n_states))
    return TypePosterior(probs, labels[int(np.argmax(probs))])


def predict_opponent_action(model: HiddenMarkovModel, obs: Sequence[int]) -> np.ndarray:
    return hmm.predict_next_observation(model, obs)


def _argmax_first(values: np.ndarray) -> int:
    return int(np.argmax(values >= values.max() - _TIE_ATOL))


def best_response(
    hmg: HiddenMarkovGame,
    predicted: Sequence[float],
    believed_type: TypePosterior | Sequence[float],
) -> int:
    """Row strategy maximising expected payoff under the type belief and the predicted column action."""
    weights = believed_type.probabilities if isinstance(believed_type, TypePosterior) else believed_type
    weights = np.asarray(weights, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    stack = hmg.payoff_stack
    n, m, k = stack.shape
    if weights.shape != (n,) or predicted.shape != (k,):
        raise DimensionMismatch(f"expected belief of length {n} and prediction of length {k}")
    values = (weights @ stack.reshape(n, m * k)).reshape(m, k) @ predicted
    return _argmax_first(values)


def equilibrium_row_mix(hmg: HiddenMarkovGame, type_label: str) -> np.ndarray:
    """Row player's equilibrium mix in one type's game (the repeated-game response)."""
    return mixed_equilibrium_2x2(hmg.type_games[type_label]).row.probabilities


def hmg_from_dict(data: dict) -> HiddenMarkovGame:
    try:
        types = list(data["types"])
        games = {str(t): game_from_dict(g) for t, g in data["games"].items()}
        prior = data["prior"]
    except KeyError as e:
        raise ValidationError(f"HMG object is missing key {e.args[0]!r}") from None
    hmg = HiddenMarkovGame(tuple(types), games, prior)
    declared = data.get("observations")
    if declared is not None and tuple(declared) != tuple(hmg.observation_labels):
        raise ValidationError(
            f"'observations' {declared} must equal the column strategies {list(hmg.observation_labels)}"
        )
    return hmg


def hmg_to_dict(hmg: HiddenMarkovGame) -> dict:
    return {
        "types": list(hmg.informed_types),
        "games": {t: game_to_dict(hmg.type_games[t]) for t in hmg.informed_types},
        "prior": hmg.prior.tolist(),
        "observations": list(hmg.observation_labels),
    }
