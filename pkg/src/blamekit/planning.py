"""Coalition best responses and the coalition inefficiency game.

The inefficiency game maps every coalition S to the return gain it could
secure by jointly best-responding while everyone outside S keeps the behavior
policy. It is always monotone with value 0 at the empty coalition, and any
such set function is realizable by a one-step model (`mmdp_from_game`).
"""
from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .mmdp import (AgentPolicy, JointPolicy, Mmdp, as_joint_table,
                   evaluate_return, _solve_linear, _solve_richardson)

MAX_AGENTS = 12
_MONOTONE_TOL = 1e-9


def coalition_mask(coalition) -> int:
    """Bitmask with agent i on bit i (agent 0 is bit 0)."""
    mask = 0
    for i in coalition:
        mask |= 1 << int(i)
    return mask


def mask_agents(mask: int, n: int) -> tuple[int, ...]:
    return tuple(i for i in range(n) if mask >> i & 1)


@dataclass(frozen=True)
class CharacteristicGame:
    """Marginal inefficiencies for all 2^n coalitions, indexed by bitmask."""

    num_agents: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))

    def value(self, coalition) -> float:
        if isinstance(coalition, (int, np.integer)):
            return float(self.values[int(coalition)])
        return float(self.values[coalition_mask(coalition)])

    @property
    def total(self) -> float:
        """Grand-coalition inefficiency."""
        return float(self.values[-1])

    def validate(self, tol: float = _MONOTONE_TOL) -> list[str]:
        problems = []
        if self.values.shape != (1 << self.num_agents,):
            return [f"values table has length {self.values.shape}, expected {1 << self.num_agents}"]
        if abs(self.values[0]) > tol:
            problems.append(f"empty-coalition value is {self.values[0]:.3g}, not 0")
        for mask in range(1, 1 << self.num_agents):
            for i in range(self.num_agents):
                if mask >> i & 1:
                    sub = mask & ~(1 << i)
                    if self.values[mask] < self.values[sub] - tol:
                        problems.append(
                            f"not monotone: value[{mask:b}]={self.values[mask]:.6g} "
                            f"< value[{sub:b}]={self.values[sub]:.6g}")
        return problems

    def serialize(self) -> str:
        lines = [f"{mask},{float(self.values[mask])!r}"
                 for mask in range(1 << self.num_agents)]
        return "\n".join(lines) + "\n"

    @staticmethod
    def deserialize(text: str) -> "CharacteristicGame":
        values = {}
        for line in text.strip().splitlines():
            mask_str, val_str = line.split(",")
            values[int(mask_str)] = float(val_str)
        size = len(values)
        n = size.bit_length() - 1
        if 1 << n != size or set(values) != set(range(size)):
            raise ValueError("expected one bitmask,value row per coalition")
        return CharacteristicGame(n, np.array([values[m] for m in range(size)]))


@dataclass(frozen=True)
class BestResponse:
    """A coalition's deterministic optimal policy against a fixed behavior."""

    coalition: frozenset[int]
    policy: dict[int, AgentPolicy]
    value: float
    state_values: np.ndarray

    def compose(self, behavior: JointPolicy) -> JointPolicy:
        """Joint policy where coalition members deviate and the rest keep behavior."""
        out = behavior
        for i, ap in self.policy.items():
            out = out.replace(i, ap)
        return out


def coalition_action_index(m: Mmdp, coalition) -> np.ndarray:
    """Index array of shape (A_C, A_D) mapping coalition/complement action
    pairs (both in sorted-agent lexicographic order) to joint-action indices."""
    agents = sorted(coalition)
    others = [i for i in range(m.num_agents) if i not in set(agents)]
    a_c = int(np.prod([m.action_counts[i] for i in agents])) if agents else 1
    a_d = int(np.prod([m.action_counts[i] for i in others])) if others else 1
    idx = np.zeros((a_c, a_d), dtype=np.int64)
    order = agents + others
    dims = [m.action_counts[i] for i in order]
    for flat in range(a_c * a_d):
        ci, di = divmod(flat, a_d)
        rest, parts = flat, []
        for k in reversed(dims):
            parts.append(rest % k)
            rest //= k
        parts.reverse()
        actions = [0] * m.num_agents
        for agent, a in zip(order, parts):
            actions[agent] = a
        idx[ci, di] = m.encode_joint(actions)
    return idx


def induced_mdp(m: Mmdp, behavior, coalition) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Single-controller MDP over the coalition's joint actions.

    The complement's actions are marginalized under the behavior's joint
    conditional (for factorized behaviors this is the product of the
    complement's rows). Returns (reward (S, A_C), transition (S, A_C, S), idx).
    """
    idx = coalition_action_index(m, coalition)
    table = as_joint_table(m, behavior)
    q = table[np.arange(m.num_states)[:, None, None], idx].sum(axis=1)  # (S, A_D)
    totals = q.sum(axis=1)
    # guard against all-zero rows (cannot happen for valid behaviors)
    q = q / np.where(totals > 0, totals, 1.0)[:, None]
    r_c = np.einsum("sd,scd->sc", q, m.reward[np.arange(m.num_states)[:, None, None], idx])
    p_c = np.einsum("sd,scdt->sct", q,
                    m.transition[np.arange(m.num_states)[:, None, None], idx])
    return r_c, p_c, idx


def solve_mdp(r: np.ndarray, p: np.ndarray, gamma: float,
              max_iters: int = 1000) -> tuple[np.ndarray, np.ndarray]:
    """Howard policy iteration with lowest-index tie-breaking.

    Returns (state values, deterministic per-state action indices). Exact up
    to the linear solver; terminates when the greedy policy is stable.
    """
    num_states, num_actions = r.shape
    solve = _solve_linear if num_states <= 2000 else _solve_richardson
    v = np.zeros(num_states)
    pol = np.argmax(r, axis=1)
    for _ in range(max_iters):
        rows = np.arange(num_states)
        p_pol = p[rows, pol]
        v = solve(p_pol, r[rows, pol], gamma)
        q = r + gamma * np.einsum("sat,t->sa", p, v)
        new_pol = np.argmax(q, axis=1)
        improving = q[rows, new_pol] > q[rows, pol] + 1e-13
        if not improving.any():
            return v, pol
        pol = np.where(improving, new_pol, pol)
    return v, pol


def best_response(m: Mmdp, behavior, coalition) -> BestResponse:
    """Optimal deterministic deviation of `coalition` against `behavior`."""
    agents = sorted(coalition)
    for i in agents:
        if not 0 <= i < m.num_agents:
            raise ValueError(f"agent index {i} out of range")
    r_c, p_c, _ = induced_mdp(m, behavior, coalition)
    v, pol = solve_mdp(r_c, p_c, m.discount)
    policy = {}
    if agents:
        dims = [m.action_counts[i] for i in agents]
        per_agent = np.zeros((len(agents), m.num_states), dtype=np.int64)
        rest = pol.copy()
        for pos in range(len(agents) - 1, -1, -1):
            per_agent[pos] = rest % dims[pos]
            rest //= dims[pos]
        for pos, i in enumerate(agents):
            policy[i] = AgentPolicy.deterministic(m.num_states, m.action_counts[i],
                                                  per_agent[pos])
    return BestResponse(frozenset(agents), policy,
                        float(m.initial_dist @ v), v)


def optimal_joint(m: Mmdp) -> BestResponse:
    """Best response of the grand coalition (the behavior is irrelevant)."""
    uniform = JointPolicy(tuple(AgentPolicy.uniform(m.num_states, k)
                                for k in m.action_counts))
    return best_response(m, uniform, range(m.num_agents))


_GAME_CACHE: dict[bytes, CharacteristicGame] = {}
_GAME_LOCK = threading.Lock()


def characteristic_game(m: Mmdp, behavior) -> CharacteristicGame:
    """Marginal inefficiency of every coalition against `behavior`.

    Memoized on the (model, behavior) content hash; agent count is capped at
    12 to keep the 2^n coalition sweep bounded.
    """
    if m.num_agents > MAX_AGENTS:
        raise ValueError(f"characteristic game limited to {MAX_AGENTS} agents")
    table = as_joint_table(m, behavior)
    key = m.content_key() + table.tobytes()
    with _GAME_LOCK:
        hit = _GAME_CACHE.get(key)
    if hit is not None:
        return hit
    j_b = evaluate_return(m, table)
    values = np.zeros(1 << m.num_agents)
    for mask in range(1, 1 << m.num_agents):
        agents = mask_agents(mask, m.num_agents)
        values[mask] = best_response(m, table, agents).value - j_b
    game = CharacteristicGame(m.num_agents, values)
    with _GAME_LOCK:
        _GAME_CACHE[key] = game
    return game


def mmdp_from_game(f: CharacteristicGame) -> tuple[Mmdp, JointPolicy]:
    """Realize a monotone set function with f(empty) = 0 as a one-step model.

    Two states (initial, terminal), binary actions; the reward of a joint
    action equals f(S) where S is the set of agents playing 1, and the
    behavior policy is all-zeros. characteristic_game of the result
    reproduces f exactly: with the complement pinned to 0, a coalition's
    reachable values are f(T) for T inside the coalition, and monotonicity
    makes f(S) the maximum.
    """
    problems = f.validate(tol=0.0)
    if problems:
        raise ValueError("set function not realizable: " + "; ".join(problems))
    n = f.num_agents
    num_actions = 1 << n
    reward = np.zeros((2, num_actions))
    m = Mmdp(2, n, (2,) * n, reward, np.zeros((2, num_actions, 2)),
             0.99, np.array([1.0, 0.0]), frozenset({1}))
    for ja in range(num_actions):
        actions = m.decode_joint(ja)
        mask = coalition_mask(i for i, a in enumerate(actions) if a == 1)
        reward[0, ja] = f.values[mask]
    transition = np.zeros((2, num_actions, 2))
    transition[0, :, 1] = 1.0
    transition[1, :, 1] = 1.0
    model = Mmdp(2, n, (2,) * n, reward, transition, 0.99,
                 np.array([1.0, 0.0]), frozenset({1}))
    behavior = JointPolicy(tuple(AgentPolicy.deterministic(2, 2, 0) for _ in range(n)))
    return model, behavior
