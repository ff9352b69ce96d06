"""Hidden Markov Games: opponent-type inference for repeated two-player games."""

from .errors import (
    DegenerateGame,
    DimensionMismatch,
    EmptyHistory,
    HMGError,
    InvalidInitialModel,
    MissingModel,
    SymbolOutOfRange,
    ValidationError,
    ZeroProbabilityObservation,
)
from .game_core import (
    BimatrixGame,
    EquilibriumProfile,
    MixedStrategy,
    StrategySet,
    expected_payoffs,
    mixed_equilibrium_2x2,
    pure_nash_equilibria,
)
from .hmg import (
    HiddenMarkovGame,
    TypePosterior,
    best_response,
    build_emission_matrix,
    infer_transitions,
    predict_opponent_action,
    to_hmm,
    type_posterior,
)
from .hmm import (
    HiddenMarkovModel,
    TrainingConfig,
    baum_welch,
    log_likelihood,
    model_distance,
    predict_next_observation,
    sample,
)

__version__ = "0.1.0"
