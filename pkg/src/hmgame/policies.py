"""Opponent-action predictors for the uninformed player.

Five decision rules share one state type: the HMM-based ``proposed`` rule, a
``bayesian`` rule that uses the same model with transitions ignored, and
three model-free baselines (``random``, ``frequent``, ``tft``).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import hmm
from .errors import EmptyHistory, MissingModel, ValidationError, ZeroProbabilityObservation
from .hmg import HiddenMarkovGame, best_response, equilibrium_row_mix
from .hmm import HiddenMarkovModel


class PolicyKind(str, enum.Enum):
    PROPOSED = "proposed"
    BAYESIAN = "bayesian"
    RANDOM = "random"
    MORE_FREQUENTLY = "frequent"
    TIT_FOR_TAT = "tft"

    @property
    def needs_model(self) -> bool:
        return self in (PolicyKind.PROPOSED, PolicyKind.BAYESIAN)


ALL_POLICIES = tuple(PolicyKind)


@dataclass(frozen=True)
class RoundRecord:
    round_index: int
    opponent_action: int
    own_action: int
    predicted_action: int


@dataclass
class PolicyState:
    """Mutable per-match state of one decision rule.

    ``belief`` is the filtered type posterior for the model-based kinds: it
    already accounts for every recorded opponent action.
    """

    kind: PolicyKind
    n_actions: int
    seed: int = 0
    model: HiddenMarkovModel | None = None
    history: list[RoundRecord] = field(default_factory=list)
    counts: np.ndarray | None = None
    belief: np.ndarray | None = None
    rng: np.random.Generator | None = None

    def __post_init__(self):
        self.kind = PolicyKind(self.kind)
        if self.n_actions < 1:
            raise ValidationError("n_actions must be positive")
        if self.counts is None:
            self.counts = np.zeros(self.n_actions, dtype=np.int64)
        if self.rng is None:
            self.rng = np.random.default_rng(self.seed)
        if self.model is not None:
            self._check_model(self.model)

    def _check_model(self, model: HiddenMarkovModel) -> None:
        if model.n_observations != self.n_actions:
            raise ValidationError(
                f"model emits {model.n_observations} symbols but the opponent has {self.n_actions} actions"
            )

    def _transitions(self) -> np.ndarray:
        if self.kind is PolicyKind.BAYESIAN:
            return np.eye(self.model.n_states)
        return self.model.transitions

    def attach_model(self, model: HiddenMarkovModel) -> None:
        """Swap in a (re)trained model and rebuild the belief from the full history."""
        self._check_model(model)
        self.model = model
        self.belief = None
        if self.history:
            obs = [r.opponent_action for r in self.history]
            self.belief = hmm.filter(self._as_used(model), obs)

    def _as_used(self, model: HiddenMarkovModel) -> HiddenMarkovModel:
        if self.kind is PolicyKind.BAYESIAN:
            return model.replace(transitions=np.eye(model.n_states))
        return model

    def next_action_distribution(self) -> np.ndarray:
        """Predicted distribution of the opponent's next action (model-based kinds)."""
        if self.model is None:
            raise MissingModel(f"policy {self.kind.value!r} needs a trained model")
        if self.belief is None:
            state_dist = self.model.initial
        else:
            state_dist = self.belief @ self._transitions()
        return state_dist @ self.model.emissions

    def type_belief(self) -> np.ndarray | None:
        """Posterior over types for the coming round, or ``None`` when there is no model."""
        if self.model is None:
            return None
        if self.belief is None:
            return self.model.initial.copy()
        return self.belief @ self._transitions()


def make_policy(kind: PolicyKind | str, n_actions: int, seed: int = 0, model: HiddenMarkovModel | None = None) -> PolicyState:
    return PolicyState(kind=PolicyKind(kind), n_actions=n_actions, seed=seed, model=model)


def predict(policy: PolicyState, trained: HiddenMarkovModel | None = None) -> int:
    """Predicted opponent action for the coming round.

    Passing a different ``trained`` model than the one the policy holds
    re-filters the whole history under the new model.
    """
    kind = policy.kind
    if trained is not None and trained is not policy.model:
        policy.attach_model(trained)

    if kind is PolicyKind.RANDOM:
        return int(policy.rng.integers(policy.n_actions))
    if kind is PolicyKind.TIT_FOR_TAT:
        if not policy.history:
            return int(policy.rng.integers(policy.n_actions))
        return policy.history[-1].opponent_action
    if kind is PolicyKind.MORE_FREQUENTLY:
        return int(np.argmax(policy.counts))
    dist = policy.next_action_distribution()
    return int(np.argmax(dist))


def update(policy: PolicyState, record: RoundRecord) -> PolicyState:
    """Fold one finished round into the policy state (in place) and return it."""
    a = record.opponent_action
    if not 0 <= a < policy.n_actions:
        raise ValidationError(f"opponent action {a} out of range")
    policy.history.append(record)
    policy.counts[a] += 1
    if policy.model is not None and policy.kind.needs_model:
        B = policy.model.emissions
        if policy.belief is None:
            prior = policy.model.initial
        else:
            prior = policy.belief @ policy._transitions()
        unnorm = prior * B[:, a]
        total = unnorm.sum()
        if total == 0.0:
            raise ZeroProbabilityObservation(
                f"round {record.round_index}: action {a} is impossible under the current belief"
            )
        policy.belief = unnorm / total
    return policy


def choose_own_action(policy: PolicyState, hmg: HiddenMarkovGame, predicted_action: int) -> int:
    """Best reply to the predicted action, weighting type payoffs by the current belief.

    Model-free kinds have no belief and use the game's prior over types.
    """
    belief = policy.type_belief()
    if belief is None:
        belief = hmg.prior
    point = np.zeros(policy.n_actions)
    point[predicted_action] = 1.0
    return best_response(hmg, point, belief)


def equilibrium_own_action(policy: PolicyState, hmg: HiddenMarkovGame, rng: np.random.Generator) -> int:
    """Repeated-game response: draw from the row equilibrium mix of the most probable type."""
    belief = policy.type_belief()
    if belief is None:
        belief = hmg.prior
    mix = equilibrium_row_mix(hmg, hmg.informed_types[int(np.argmax(belief))])
    return int(rng.choice(mix.size, p=mix))


def hit_rate(records) -> float:
    records = list(records)
    if not records:
        raise EmptyHistory("hit rate of an empty history is undefined")
    return sum(r.predicted_action == r.opponent_action for r in records) / len(records)
