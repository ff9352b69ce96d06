import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmgame import hmm
from hmgame.errors import EmptyHistory, MissingModel
from hmgame.experiments import AGGRESSIVE_TRANSITIONS, tennis_hmg
from hmgame.hmg import to_hmm
from hmgame.hmm import HiddenMarkovModel
from hmgame.policies import (
    ALL_POLICIES,
    PolicyKind,
    RoundRecord,
    choose_own_action,
    equilibrium_own_action,
    hit_rate,
    make_policy,
    predict,
    update,
)
from oracles import brute_predict

OPEN, CENTER = 0, 1
TENNIS_MODEL = to_hmm(tennis_hmg(), AGGRESSIVE_TRANSITIONS)


def play(policy, actions, model=None):
    preds = []
    for t, a in enumerate(actions):
        guess = predict(policy, model)
        preds.append(guess)
        update(policy, RoundRecord(t, a, 0, guess))
    return preds


def test_cli_names():
    assert [p.value for p in ALL_POLICIES] == ["proposed", "bayesian", "random", "frequent", "tft"]


def test_tit_for_tat_repeats_last():
    p = make_policy("tft", 2, seed=1)
    first = predict(p)
    assert first in (0, 1)
    update(p, RoundRecord(0, OPEN, 0, first))
    assert predict(p) == OPEN
    update(p, RoundRecord(1, CENTER, 0, OPEN))
    assert predict(p) == CENTER


def test_more_frequently():
    p = make_policy("frequent", 2)
    assert predict(p) == 0
    play(p, [OPEN, OPEN, CENTER])
    assert predict(p) == OPEN
    q = make_policy("frequent", 2)
    play(q, [CENTER, OPEN])
    assert predict(q) == 0  # tie -> lowest index


def test_counts_accumulate():
    p = make_policy("frequent", 3)
    play(p, [2] * 7)
    assert p.counts.tolist() == [0, 0, 7]


def test_model_kinds_need_a_model():
    for kind in ("proposed", "bayesian"):
        with pytest.raises(MissingModel):
            predict(make_policy(kind, 2))


def test_proposed_belief_equals_filter():
    obs, _ = hmm.sample(TENNIS_MODEL, 400, seed=12)
    p = make_policy("proposed", 2, model=TENNIS_MODEL)
    for t, a in enumerate(obs):
        update(p, RoundRecord(t, int(a), 0, 0))
        if t % 37 == 0 or t == obs.size - 1:
            np.testing.assert_allclose(p.belief, hmm.filter(TENNIS_MODEL, obs[: t + 1]), atol=1e-12, rtol=0)


def test_proposed_prediction_matches_enumeration_on_revealing_model():
    m = HiddenMarkovModel([[0.1, 0.9], [0.7, 0.3]], np.eye(2), [0.5, 0.5])
    rng = np.random.default_rng(0)
    for L in range(1, 7):
        obs = rng.integers(2, size=L).tolist()
        p = make_policy("proposed", 2, model=m)
        play(p, obs)
        oracle = brute_predict(m.transitions, m.emissions, m.initial, obs)
        assert predict(p) == int(np.argmax(oracle))


def test_bayesian_ignores_transitions():
    obs, _ = hmm.sample(TENNIS_MODEL, 300, seed=4)
    static = TENNIS_MODEL.replace(transitions=np.eye(3))
    b = make_policy("bayesian", 2, model=TENNIS_MODEL)
    for t, a in enumerate(obs):
        update(b, RoundRecord(t, int(a), 0, 0))
    np.testing.assert_allclose(b.belief, hmm.filter(static, obs), atol=1e-12)


def test_bayesian_and_proposed_coincide_for_identity_transitions():
    static = TENNIS_MODEL.replace(transitions=np.eye(3))
    obs, _ = hmm.sample(TENNIS_MODEL, 500, seed=21)
    obs = obs.tolist()
    a = play(make_policy("proposed", 2, model=static), obs)
    b = play(make_policy("bayesian", 2, model=static), obs)
    assert a == b


def test_random_policy_near_half():
    obs, _ = hmm.sample(TENNIS_MODEL, 10_000, seed=99)
    p = make_policy("random", 2, seed=5)
    preds = play(p, obs.tolist())
    assert abs(np.mean(np.array(preds) == obs) - 0.5) <= 0.02


def test_random_update_does_not_change_draws():
    a, b = make_policy("random", 2, seed=8), make_policy("random", 2, seed=8)
    with_updates = play(a, [1] * 50)
    without = [predict(b) for _ in range(50)]
    assert with_updates == without


def test_attach_model_refilters_history():
    obs, _ = hmm.sample(TENNIS_MODEL, 100, seed=2)
    other = TENNIS_MODEL.replace(transitions=np.full((3, 3), 1 / 3))
    p = make_policy("proposed", 2, model=other)
    play(p, obs.tolist())
    predict(p, TENNIS_MODEL)
    assert p.model is TENNIS_MODEL
    np.testing.assert_allclose(p.belief, hmm.filter(TENNIS_MODEL, obs), atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 1), max_size=40), st.integers(0, 2**32 - 1), st.sampled_from(ALL_POLICIES))
def test_predictions_valid_and_deterministic(actions, seed, kind):
    model = TENNIS_MODEL if kind.needs_model else None
    a = play(make_policy(kind, 2, seed=seed, model=model), actions)
    b = play(make_policy(kind, 2, seed=seed, model=model), actions)
    assert a == b
    assert all(x in (0, 1) for x in a)


def test_own_action_choices():
    hmg = tennis_hmg()
    p = make_policy("proposed", 2, model=TENNIS_MODEL.replace(initial=[1.0, 0.0, 0.0]))
    assert choose_own_action(p, hmg, CENTER) == OPEN
    assert choose_own_action(p, hmg, OPEN) == CENTER
    rng = np.random.default_rng(0)
    draws = [equilibrium_own_action(p, hmg, rng) for _ in range(4000)]
    # receiver's aggressive-type equilibrium plays Open with probability ~0.7757
    assert abs(np.mean(np.array(draws) == OPEN) - 0.7757) < 0.03
    assert choose_own_action(make_policy("tft", 2), hmg, OPEN) in (0, 1)


def test_hit_rate():
    recs = [RoundRecord(i, i % 2, 0, i % 2) for i in range(10)]
    assert hit_rate(recs) == 1.0
    alt = [RoundRecord(i, 0, 0, i % 2) for i in range(200)]
    assert hit_rate(alt) == 0.5
    with pytest.raises(EmptyHistory):
        hit_rate([])


def test_policy_kind_parsing():
    assert PolicyKind("frequent") is PolicyKind.MORE_FREQUENTLY
    with pytest.raises(ValueError):
        PolicyKind("bogus")
