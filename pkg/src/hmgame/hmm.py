"""Discrete hidden Markov models.

Sampling, scaled forward-backward inference, filtering and one-step
prediction, Baum-Welch re-estimation (optionally with the emission table and
initial distribution held fixed), and a symmetrised cross-likelihood distance
between two models.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels
from .errors import (
    DimensionMismatch,
    InvalidInitialModel,
    SymbolOutOfRange,
    ValidationError,
    ZeroProbabilityObservation,
)

log = logging.getLogger(__name__)

STOCHASTIC_ATOL = 1e-9


def _check_stochastic(name: str, table: np.ndarray) -> None:
    if np.any(table < 0) or np.any(table > 1) or not np.all(np.isfinite(table)):
        raise ValidationError(f"{name} entries must lie in [0, 1]")
    sums = table.sum(axis=-1)
    if np.any(np.abs(sums - 1.0) > STOCHASTIC_ATOL):
        raise ValidationError(f"{name} rows must sum to 1 (got {np.round(sums, 12)})")


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class HiddenMarkovModel:
    """``transitions[i, j] = P(next=j | current=i)``, ``emissions[j, h] = P(symbol h | state j)``."""

    transitions: np.ndarray
    emissions: np.ndarray
    initial: np.ndarray
    state_labels: tuple[str, ...] | None = None
    observation_labels: tuple[str, ...] | None = None

    def __post_init__(self):
        A, B, pi = _readonly(self.transitions), _readonly(self.emissions), _readonly(self.initial)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise DimensionMismatch(f"transitions must be a non-empty square table, got shape {A.shape}")
        n = A.shape[0]
        if B.ndim != 2 or B.shape[0] != n or B.shape[1] == 0:
            raise DimensionMismatch(f"emissions must have shape ({n}, k), got {B.shape}")
        if pi.shape != (n,):
            raise DimensionMismatch(f"initial must have length {n}, got shape {pi.shape}")
        _check_stochastic("transitions", A)
        _check_stochastic("emissions", B)
        _check_stochastic("initial", pi)
        for name, labels, size in (
            ("state_labels", self.state_labels, n),
            ("observation_labels", self.observation_labels, B.shape[1]),
        ):
            if labels is not None:
                labels = tuple(str(x) for x in labels)
                if len(labels) != size:
                    raise DimensionMismatch(f"{name} needs {size} entries, got {len(labels)}")
                object.__setattr__(self, name, labels)
        object.__setattr__(self, "transitions", A)
        object.__setattr__(self, "emissions", B)
        object.__setattr__(self, "initial", pi)

    @property
    def n_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def n_observations(self) -> int:
        return self.emissions.shape[1]

    def replace(self, **changes) -> HiddenMarkovModel:
        fields = dict(
            transitions=self.transitions,
            emissions=self.emissions,
            initial=self.initial,
            state_labels=self.state_labels,
            observation_labels=self.observation_labels,
        )
        fields.update(changes)
        return HiddenMarkovModel(**fields)

    def __eq__(self, other):
        if not isinstance(other, HiddenMarkovModel):
            return NotImplemented
        return (
            np.array_equal(self.transitions, other.transitions)
            and np.array_equal(self.emissions, other.emissions)
            and np.array_equal(self.initial, other.initial)
            and self.state_labels == other.state_labels
            and self.observation_labels == other.observation_labels
        )

    __hash__ = None


@dataclass(frozen=True)
class TrainingConfig:
    max_iterations: int = 200
    log_likelihood_tolerance: float = 1e-6
    clamp_emissions: bool = False
    clamp_initial: bool = True
    seed: int = 0

    def __post_init__(self):
        if int(self.max_iterations) < 1:
            raise ValidationError("max_iterations must be >= 1")
        if not self.log_likelihood_tolerance > 0:
            raise ValidationError("log_likelihood_tolerance must be > 0")
        if int(self.seed) < 0:
            raise ValidationError("seed must be a non-negative integer")


def as_observations(model: HiddenMarkovModel, obs: Sequence[int], *, allow_empty: bool = False) -> np.ndarray:
    arr = np.asarray(obs)
    if arr.ndim != 1:
        raise ValidationError("observations must be a 1-D sequence of symbol indices")
    if arr.size == 0:
        if allow_empty:
            return np.zeros(0, dtype=np.int64)
        raise ValidationError("observation sequence is empty")
    if not np.issubdtype(arr.dtype, np.integer):
        if not np.all(np.equal(np.mod(arr, 1), 0)):
            raise SymbolOutOfRange("observation symbols must be integers")
    arr = arr.astype(np.int64)
    bad = (arr < 0) | (arr >= model.n_observations)
    if bad.any():
        t = int(np.argmax(bad))
        raise SymbolOutOfRange(
            f"symbol {int(arr[t])} at position {t} is outside [0, {model.n_observations})"
        )
    return arr


def sample(model: HiddenMarkovModel, length: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw ``(observations, hidden_states)`` of the given length.

    Driven entirely by ``seed``; both kernel backends consume the same
    uniforms, so they produce the same path.
    """
    if length < 1:
        raise ValidationError("length must be positive")
    rng = np.random.default_rng(seed)
    u = rng.random((2, length))
    states, symbols = kernels.sample_path(
        np.cumsum(model.initial),
        np.cumsum(model.transitions, axis=1),
        np.cumsum(model.emissions, axis=1),
        u[0],
        u[1],
    )
    return symbols, states


def _forward(model: HiddenMarkovModel, obs: np.ndarray):
    return kernels.forward(model.transitions, model.emissions, model.initial, obs)


def _first_zero(scale: np.ndarray) -> int | None:
    zeros = np.flatnonzero(scale == 0.0)
    return int(zeros[0]) if zeros.size else None


def log_likelihood(model: HiddenMarkovModel, obs: Sequence[int]) -> float:
    """``log P(obs | model)``; ``-inf`` when the sequence is impossible."""
    obs = as_observations(model, obs)
    _, scale = _forward(model, obs)
    if _first_zero(scale) is not None:
        return -math.inf
    return float(np.log(scale).sum())


def filter(model: HiddenMarkovModel, obs: Sequence[int]) -> np.ndarray:
    """Posterior over hidden states after the last observation."""
    obs = as_observations(model, obs)
    alpha, scale = _forward(model, obs)
    t = _first_zero(scale)
    if t is not None:
        raise ZeroProbabilityObservation(f"observation at position {t} has probability zero")
    return alpha[-1].copy()


def filter_all(model: HiddenMarkovModel, obs: Sequence[int]) -> np.ndarray:
    """Filtered posteriors for every prefix, shape ``(len(obs), n_states)``."""
    obs = as_observations(model, obs)
    alpha, scale = _forward(model, obs)
    t = _first_zero(scale)
    if t is not None:
        raise ZeroProbabilityObservation(f"observation at position {t} has probability zero")
    return alpha


def predict_next_observation(model: HiddenMarkovModel, obs: Sequence[int]) -> np.ndarray:
    """Distribution of the symbol following ``obs``.

    For an empty history this is the distribution of the first symbol,
    ``initial @ emissions``.
    """
    obs = as_observations(model, obs, allow_empty=True)
    if obs.size == 0:
        return model.initial @ model.emissions
    return (filter(model, obs) @ model.transitions) @ model.emissions


def uniform_transitions(n_states: int, seed: int, noise: float = 0.05) -> np.ndarray:
    """Uniform rows plus seeded uniform noise in ``[-noise, noise]``, renormalised."""
    rng = np.random.default_rng(seed)
    A = 1.0 / n_states + rng.uniform(-noise, noise, size=(n_states, n_states))
    A = np.clip(A, 1e-12, None)
    return A / A.sum(axis=1, keepdims=True)


def _normalise_rows(counts: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=-1, keepdims=True)
    out = np.where(totals > 0, counts / np.where(totals > 0, totals, 1.0), fallback)
    # absorb rounding so rows sum to 1 well inside the 1e-9 validation bound
    return out / out.sum(axis=-1, keepdims=True)


@dataclass
class TrainingResult:
    model: HiddenMarkovModel
    trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def iterations(self) -> int:
        return len(self.trace) - 1

    def __iter__(self):
        # allows ``model, trace = baum_welch(...)``
        return iter((self.model, self.trace))


def baum_welch(
    obs: Sequence[int],
    n_states: int,
    initial_model: HiddenMarkovModel,
    config: TrainingConfig = TrainingConfig(),
) -> TrainingResult:
    """EM re-estimation of an HMM from a single observation sequence.

    ``trace[k]`` is the log-likelihood of the model after ``k`` updates. The
    loop ends after ``config.max_iterations`` updates or as soon as one update
    gains less than ``config.log_likelihood_tolerance``.
    """
    if not isinstance(initial_model, HiddenMarkovModel):
        raise InvalidInitialModel("initial_model must be a HiddenMarkovModel")
    if initial_model.n_states != n_states:
        raise InvalidInitialModel(
            f"initial model has {initial_model.n_states} states, expected {n_states}"
        )
    obs = as_observations(initial_model, obs)
    if obs.size < 2:
        raise ValidationError("Baum-Welch needs at least two observations")

    A = initial_model.transitions.copy()
    B = initial_model.emissions.copy()
    pi = initial_model.initial.copy()
    k = initial_model.n_observations
    onehot = np.eye(k)[obs]

    trace: list[float] = []
    model = initial_model
    converged = False
    for it in range(config.max_iterations + 1):
        alpha, scale = kernels.forward(A, B, pi, obs)
        t0 = _first_zero(scale)
        if t0 is not None:
            raise ZeroProbabilityObservation(
                f"observation at position {t0} has probability zero (EM iteration {it})"
            )
        ll = float(np.log(scale).sum())
        trace.append(ll)
        log.debug("baum-welch iteration %d: log-likelihood %.10f", it, ll)
        if it > 0 and ll - trace[-2] < config.log_likelihood_tolerance:
            converged = True
            break
        if it == config.max_iterations:
            break

        beta = kernels.backward(A, B, obs, scale)
        gamma = alpha * beta
        xi = kernels.transition_counts(A, B, obs, alpha, beta, scale)
        A = _normalise_rows(xi, A)
        if not config.clamp_initial:
            pi = _normalise_rows(gamma[0], pi)
        if not config.clamp_emissions:
            B = _normalise_rows(gamma.T @ onehot, B)
        model = model.replace(
            transitions=A,
            emissions=initial_model.emissions if config.clamp_emissions else B,
            initial=initial_model.initial if config.clamp_initial else pi,
        )
    log.info("baum-welch stopped after %d updates (converged=%s)", len(trace) - 1, converged)
    return TrainingResult(model=model, trace=trace, converged=converged)


def model_distance(
    model_a: HiddenMarkovModel,
    model_b: HiddenMarkovModel,
    sequence_length: int,
    seed: int,
) -> float:
    """Symmetrised per-symbol cross log-likelihood deficit between two models.

    With ``D(x, y) = (log P(O_y | x) - log P(O_y | y)) / T`` and ``O_y`` drawn
    from ``y``, returns ``-(D(a, b) + D(b, a)) / 2``. Both sequences use the
    same seed, so the value is exactly symmetric in its arguments. Finite-T
    estimates can come out slightly negative; they are not clipped.
    """
    if model_a.n_observations != model_b.n_observations:
        raise DimensionMismatch("models must share the observation alphabet")
    T = sequence_length

    def deficit(x: HiddenMarkovModel, y: HiddenMarkovModel) -> float:
        seq, _ = sample(y, T, seed)
        cross = log_likelihood(x, seq)
        if cross == -math.inf:
            raise ZeroProbabilityObservation("a sequence sampled from one model is impossible under the other")
        return (cross - log_likelihood(y, seq)) / T

    # 0.0 - x keeps identical models at +0.0 rather than -0.0
    return 0.0 - (deficit(model_a, model_b) + deficit(model_b, model_a)) / 2.0


def stationary_distribution(transitions: np.ndarray, tol: float = 1e-14, max_iter: int = 100_000) -> np.ndarray:
    """Power iteration from the uniform vector."""
    A = np.asarray(transitions, dtype=float)
    v = np.full(A.shape[0], 1.0 / A.shape[0])
    for _ in range(max_iter):
        nxt = v @ A
        if np.abs(nxt - v).max() < tol:
            return nxt
        v = nxt
    return v


def model_to_dict(model: HiddenMarkovModel) -> dict:
    out = {
        "transitions": model.transitions.tolist(),
        "emissions": model.emissions.tolist(),
        "initial": model.initial.tolist(),
    }
    if model.state_labels is not None:
        out["state_labels"] = list(model.state_labels)
    if model.observation_labels is not None:
        out["observation_labels"] = list(model.observation_labels)
    return out


def model_from_dict(data: dict) -> HiddenMarkovModel:
    try:
        return HiddenMarkovModel(
            transitions=data["transitions"],
            emissions=data["emissions"],
            initial=data["initial"],
            state_labels=data.get("state_labels"),
            observation_labels=data.get("observation_labels"),
        )
    except KeyError as e:
        raise ValidationError(f"HMM object is missing key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"malformed HMM tables: {e}") from None


def write_trace_csv(trace: Sequence[float], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "log_likelihood"])
        for i, ll in enumerate(trace):
            w.writerow([i, repr(float(ll))])
