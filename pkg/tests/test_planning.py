"""Coalition best responses, the inefficiency game, and its realizability."""
import itertools

import numpy as np
import pytest

from blamekit.mmdp import AgentPolicy, JointPolicy, evaluate_return
from blamekit.planning import (
    MAX_AGENTS,
    CharacteristicGame,
    best_response,
    characteristic_game,
    coalition_action_index,
    coalition_mask,
    induced_mdp,
    mask_agents,
    mmdp_from_game,
    optimal_joint,
    solve_mdp,
)
from blamekit.properties import random_monotone_game
from helpers import random_factorized, random_mmdp


def brute_force_best_value(m, behavior, coalition):
    """Max return over all deterministic coalition deviations.

    Stationary deterministic policies suffice for the induced MDP, so this
    enumeration is an exact oracle on small models.
    """
    agents = sorted(coalition)
    if not agents:
        return evaluate_return(m, behavior)
    per_agent_maps = [itertools.product(range(m.action_counts[i]),
                                        repeat=m.num_states)
                      for i in agents]
    best = -np.inf
    for combo in itertools.product(*per_agent_maps):
        pi = behavior
        for i, actions in zip(agents, combo):
            pi = pi.replace(i, AgentPolicy.deterministic(
                m.num_states, m.action_counts[i], list(actions)))
        best = max(best, evaluate_return(m, pi))
    return best


def test_coalition_mask_roundtrip():
    assert coalition_mask([0, 2]) == 0b101
    assert coalition_mask(()) == 0
    assert mask_agents(0b101, 3) == (0, 2)
    assert mask_agents(0, 4) == ()
    for mask in range(16):
        assert coalition_mask(mask_agents(mask, 4)) == mask


def test_best_response_matches_exhaustive_search():
    for seed in range(6):
        rng = np.random.default_rng(200 + seed)
        m = random_mmdp(rng, num_states=3, action_counts=(2, 2), gamma=0.9)
        behavior = random_factorized(rng, m)
        for coalition in [(), (0,), (1,), (0, 1)]:
            br = best_response(m, behavior, coalition)
            expected = brute_force_best_value(m, behavior, coalition)
            assert br.value == pytest.approx(expected, abs=1e-9), \
                f"seed {seed}, coalition {coalition}"


def test_best_response_compose_only_touches_coalition():
    rng = np.random.default_rng(20)
    m = random_mmdp(rng, num_states=3, action_counts=(2, 3), gamma=0.9)
    behavior = random_factorized(rng, m)
    br = best_response(m, behavior, (1,))
    composed = br.compose(behavior)
    assert composed.agents[0] is behavior.agents[0]
    assert composed.agents[1] is br.policy[1]
    assert evaluate_return(m, composed) == pytest.approx(br.value, abs=1e-9)
    assert br.coalition == frozenset({1})
    with pytest.raises(ValueError):
        best_response(m, behavior, (5,))


def test_solve_mdp_two_state_chain():
    """Action 1 pays 1 now and parks in a zero state; action 0 pays 0.5 forever."""
    r = np.array([[0.5, 1.0], [0.0, 0.0]])
    p = np.zeros((2, 2, 2))
    p[0, 0, 0] = 1.0
    p[0, 1, 1] = 1.0
    p[1, :, 1] = 1.0
    v, pol = solve_mdp(r, p, gamma=0.9)
    # staying is worth 0.5 / 0.1 = 5, leaving only 1
    assert pol[0] == 0
    assert v[0] == pytest.approx(5.0, abs=1e-9)
    assert v[1] == pytest.approx(0.0, abs=1e-12)

    v, pol = solve_mdp(r, p, gamma=0.2)
    assert pol[0] == 1  # 0.5 / 0.8 = 0.625 < 1
    assert v[0] == pytest.approx(1.0, abs=1e-9)


def test_coalition_action_index_layout():
    m = random_mmdp(np.random.default_rng(21), action_counts=(2, 3))
    idx = coalition_action_index(m, (0,))
    assert idx.shape == (2, 3)
    for c in range(2):
        for d in range(3):
            assert idx[c, d] == m.encode_joint((c, d))
    idx = coalition_action_index(m, (1,))
    assert idx.shape == (3, 2)
    for c in range(3):
        for d in range(2):
            assert idx[c, d] == m.encode_joint((d, c))
    full = coalition_action_index(m, (0, 1))
    assert full.shape == (6, 1)
    np.testing.assert_array_equal(full[:, 0], np.arange(6))
    empty = coalition_action_index(m, ())
    assert empty.shape == (1, 6)


def test_induced_mdp_marginalizes_complement():
    rng = np.random.default_rng(22)
    m = random_mmdp(rng, num_states=3, action_counts=(2, 3), gamma=0.9)
    behavior = random_factorized(rng, m)
    r_c, p_c, _ = induced_mdp(m, behavior, (0,))
    q = behavior.agents[1].probs  # complement conditional
    for s in range(3):
        for a0 in range(2):
            expect_r = sum(q[s, a1] * m.reward[s, m.encode_joint((a0, a1))]
                           for a1 in range(3))
            assert r_c[s, a0] == pytest.approx(expect_r, abs=1e-12)
            expect_p = sum(q[s, a1] * m.transition[s, m.encode_joint((a0, a1))]
                           for a1 in range(3))
            np.testing.assert_allclose(p_c[s, a0], expect_p, atol=1e-12)


def test_characteristic_game_monotone_and_grounded():
    for seed in range(5):
        rng = np.random.default_rng(300 + seed)
        m = random_mmdp(rng, num_states=3, action_counts=(2, 2, 2), gamma=0.8)
        behavior = random_factorized(rng, m)
        game = characteristic_game(m, behavior)
        assert game.validate() == []
        assert game.value(()) == 0.0
        # singleton and pair values agree with direct best responses
        j_b = evaluate_return(m, behavior)
        for coalition in [(0,), (2,), (0, 1), (1, 2)]:
            direct = best_response(m, behavior, coalition).value - j_b
            assert game.value(coalition) == pytest.approx(direct, abs=1e-9)
        assert game.total == pytest.approx(
            optimal_joint(m).value - j_b, abs=1e-9)


def test_characteristic_game_is_memoized():
    rng = np.random.default_rng(23)
    m = random_mmdp(rng, num_states=3, action_counts=(2, 2))
    behavior = random_factorized(rng, m)
    first = characteristic_game(m, behavior)
    second = characteristic_game(m, behavior)
    assert first is second


def test_characteristic_game_agent_cap():
    rng = np.random.default_rng(24)
    m = random_mmdp(rng, num_states=2, action_counts=(1,) * (MAX_AGENTS + 1))
    behavior = JointPolicy(tuple(AgentPolicy.uniform(2, 1)
                                 for _ in range(MAX_AGENTS + 1)))
    with pytest.raises(ValueError, match="limited"):
        characteristic_game(m, behavior)


def test_mmdp_from_game_reproduces_the_set_function():
    for seed in range(10):
        f = random_monotone_game(int(np.random.default_rng(seed).integers(2, 5)),
                                 seed=400 + seed)
        model, behavior = mmdp_from_game(f)
        back = characteristic_game(model, behavior)
        assert np.abs(back.values - f.values).max() <= 1e-12


def test_mmdp_from_game_rejects_invalid_input():
    dented = CharacteristicGame(2, np.array([0.0, 1.0, 1.0, 0.5]))
    with pytest.raises(ValueError, match="not realizable"):
        mmdp_from_game(dented)
    lifted = CharacteristicGame(2, np.array([0.3, 1.0, 1.0, 1.5]))
    with pytest.raises(ValueError, match="not realizable"):
        mmdp_from_game(lifted)


def test_game_validate_reports_problems():
    ok = CharacteristicGame(2, np.array([0.0, 0.5, 0.25, 0.75]))
    assert ok.validate() == []
    assert ok.total == 0.75
    dented = CharacteristicGame(2, np.array([0.0, 0.5, 0.25, 0.1]))
    assert any("not monotone" in p for p in dented.validate())
    off = CharacteristicGame(2, np.array([0.2, 0.5, 0.5, 0.9]))
    assert any("empty-coalition" in p for p in off.validate())
    short = CharacteristicGame(2, np.array([0.0, 0.5]))
    assert len(short.validate()) == 1


def test_game_serialize_roundtrip():
    game = CharacteristicGame(2, np.array([0.0, 1.0 / 3.0, 0.2, 0.7]))
    text = game.serialize()
    back = CharacteristicGame.deserialize(text)
    assert back.num_agents == 2
    np.testing.assert_array_equal(back.values, game.values)
    with pytest.raises(ValueError):
        CharacteristicGame.deserialize("0,0.0\n1,1.0\n2,2.0\n")
    with pytest.raises(ValueError):
        CharacteristicGame.deserialize("0,0.0\n1,1.0\n1,2.0\n3,3.0\n")
