import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hmgame.experiments import tennis_hmg  # noqa: E402
from hmgame.game_core import BimatrixGame  # noqa: E402
from hmgame.hmm import HiddenMarkovModel  # noqa: E402

TABLE6 = [[(3, 3), (2, 5)], [(5, 2), (1, 1)]]

# 3-state, 2-symbol models for the brute-force comparisons
SMALL_MODELS = {
    "tennis-agg": HiddenMarkovModel(
        [[0.8, 0.15, 0.05], [0.2, 0.6, 0.2], [0.1, 0.3, 0.6]],
        [[0.74 / 1.07, 0.33 / 1.07], [0.65 / 1.4, 0.75 / 1.4], [0.4, 0.6]],
        [1 / 3, 1 / 3, 1 / 3],
    ),
    "skewed": HiddenMarkovModel(
        [[0.1, 0.7, 0.2], [0.5, 0.25, 0.25], [0.05, 0.05, 0.9]],
        [[0.95, 0.05], [0.3, 0.7], [0.5, 0.5]],
        [0.6, 0.3, 0.1],
    ),
    "sparse": HiddenMarkovModel(
        [[0.0, 1.0, 0.0], [0.0, 0.5, 0.5], [0.7, 0.0, 0.3]],
        [[1.0, 0.0], [0.2, 0.8], [0.6, 0.4]],
        [0.2, 0.0, 0.8],
    ),
}


@pytest.fixture
def table6():
    return BimatrixGame.from_tables(
        np.array(TABLE6)[..., 0], np.array(TABLE6)[..., 1], ["s1", "s2"], ["s1", "s2"]
    )


@pytest.fixture
def tennis():
    return tennis_hmg()


@pytest.fixture(params=sorted(SMALL_MODELS))
def small_model(request):
    return SMALL_MODELS[request.param]


# -- suite-wide EM guard -----------------------------------------------------
# Every Baum-Welch call made anywhere in the suite is checked for a
# non-decreasing trace and, when clamped, bit-identical emissions.

TRAINING_RUNS = {"count": 0}


@pytest.fixture(autouse=True, scope="session")
def _guard_baum_welch():
    from hmgame import hmm as hmm_module

    original = hmm_module.baum_welch

    def checked(obs, n_states, initial_model, config=hmm_module.TrainingConfig()):
        result = original(obs, n_states, initial_model, config)
        trace = result.trace
        bad = [i for i in range(1, len(trace)) if trace[i] < trace[i - 1] - 1e-8]
        assert not bad, f"log-likelihood decreased at EM iterations {bad}"
        if config.clamp_emissions:
            assert result.model.emissions.tobytes() == initial_model.emissions.tobytes()
        TRAINING_RUNS["count"] += 1
        return result

    hmm_module.baum_welch = checked
    yield
    hmm_module.baum_welch = original


# -- acceptance report -------------------------------------------------------

ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE:
        terminalreporter.write_line(line)
    terminalreporter.write_line(f"(Baum-Welch runs checked suite-wide: {TRAINING_RUNS['count']})")
