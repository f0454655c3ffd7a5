"""Finite multi-agent MDPs with factored joint actions, and exact policy evaluation.

States and per-agent actions are integer-indexed. A joint action is a single
integer in mixed-radix encoding with agent 0 as the most significant digit,
so reward and transition tables are plain 2-D / 3-D arrays.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

ROW_TOL = 1e-12


@dataclass(frozen=True)
class Mmdp:
    """A cooperative multi-agent MDP (shared reward, factored action space).

    reward has shape (num_states, num_joint_actions); transition has shape
    (num_states, num_joint_actions, num_states). terminal_states are absorbing
    with zero reward for every joint action.
    """

    num_states: int
    num_agents: int
    action_counts: tuple[int, ...]
    reward: np.ndarray
    transition: np.ndarray
    discount: float
    initial_dist: np.ndarray
    terminal_states: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "action_counts", tuple(int(k) for k in self.action_counts))
        object.__setattr__(self, "reward", np.asarray(self.reward, dtype=float))
        object.__setattr__(self, "transition", np.asarray(self.transition, dtype=float))
        object.__setattr__(self, "initial_dist", np.asarray(self.initial_dist, dtype=float))
        object.__setattr__(self, "terminal_states", frozenset(int(s) for s in self.terminal_states))

    @property
    def num_joint_actions(self) -> int:
        return int(np.prod(self.action_counts))

    def encode_joint(self, actions) -> int:
        """Mixed-radix joint-action index, agent 0 most significant."""
        idx = 0
        for k, a in zip(self.action_counts, actions):
            if not 0 <= a < k:
                raise ValueError(f"action {a} out of range for agent with {k} actions")
            idx = idx * k + int(a)
        return idx

    def decode_joint(self, idx: int) -> tuple[int, ...]:
        actions = []
        for k in reversed(self.action_counts):
            actions.append(idx % k)
            idx //= k
        return tuple(reversed(actions))

    def content_key(self) -> bytes:
        """Stable content hash, used to memoize planning results."""
        h = hashlib.sha256()
        h.update(np.int64([self.num_states, self.num_agents]).tobytes())
        h.update(np.int64(self.action_counts).tobytes())
        h.update(np.float64(self.discount).tobytes())
        h.update(self.reward.tobytes())
        h.update(self.transition.tobytes())
        h.update(self.initial_dist.tobytes())
        h.update(np.int64(sorted(self.terminal_states)).tobytes())
        return h.digest()


@dataclass(frozen=True)
class AgentPolicy:
    """One agent's stationary policy: probs[s, a] = pi_i(a | s)."""

    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "probs", np.asarray(self.probs, dtype=float))

    @staticmethod
    def deterministic(num_states: int, num_actions: int, actions) -> "AgentPolicy":
        """One-hot rows; `actions` is a scalar or a per-state array."""
        rows = np.zeros((num_states, num_actions))
        rows[np.arange(num_states), np.broadcast_to(actions, (num_states,))] = 1.0
        return AgentPolicy(rows)

    @staticmethod
    def uniform(num_states: int, num_actions: int) -> "AgentPolicy":
        return AgentPolicy(np.full((num_states, num_actions), 1.0 / num_actions))

    def validate(self) -> list[str]:
        problems = []
        if (self.probs < -ROW_TOL).any():
            problems.append("negative action probability")
        bad = np.flatnonzero(np.abs(self.probs.sum(axis=1) - 1.0) > ROW_TOL)
        if bad.size:
            problems.append(f"rows not summing to 1 at states {bad.tolist()}")
        return problems


@dataclass(frozen=True)
class JointPolicy:
    """A factorized joint policy: one AgentPolicy per agent."""

    agents: tuple[AgentPolicy, ...]

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))

    @property
    def num_agents(self) -> int:
        return len(self.agents)

    def replace(self, agent: int, policy: AgentPolicy) -> "JointPolicy":
        parts = list(self.agents)
        parts[agent] = policy
        return JointPolicy(tuple(parts))

    def joint_table(self, m: Mmdp) -> np.ndarray:
        """Dense (num_states, num_joint_actions) table of product probabilities."""
        if len(self.agents) != m.num_agents:
            raise ValueError("policy has wrong number of agents for this model")
        table = np.ones((m.num_states, 1))
        for ap, k in zip(self.agents, m.action_counts):
            if ap.probs.shape != (m.num_states, k):
                raise ValueError("agent policy shape does not match model")
            table = table[:, :, None] * ap.probs[:, None, :]
            table = table.reshape(m.num_states, -1)
        return table

    def validate(self, m: Mmdp | None = None) -> list[str]:
        problems = []
        for i, ap in enumerate(self.agents):
            problems += [f"agent {i}: {p}" for p in ap.validate()]
        if m is not None:
            if len(self.agents) != m.num_agents:
                problems.append("agent count does not match model")
            else:
                for i, (ap, k) in enumerate(zip(self.agents, m.action_counts)):
                    if ap.probs.shape != (m.num_states, k):
                        problems.append(f"agent {i}: policy shape {ap.probs.shape} vs model")
        return problems


def as_joint_table(m: Mmdp, behavior) -> np.ndarray:
    """Coerce a JointPolicy or an explicit (S, A) table to a dense joint table.

    Explicit tables are how the uncertainty module feeds non-factorized
    behaviors into planning; everywhere else behaviors are factorized.
    """
    if isinstance(behavior, JointPolicy):
        return behavior.joint_table(m)
    table = np.asarray(behavior, dtype=float)
    if table.shape != (m.num_states, m.num_joint_actions):
        raise ValueError(f"behavior table has shape {table.shape}, "
                         f"expected {(m.num_states, m.num_joint_actions)}")
    return table


def validate_mmdp(m: Mmdp) -> list[str]:
    """Return a list of violated invariants (empty iff the model is valid)."""
    problems = []
    A = m.num_joint_actions
    if m.reward.shape != (m.num_states, A):
        problems.append(f"reward table shape {m.reward.shape}, expected {(m.num_states, A)}")
    if m.transition.shape != (m.num_states, A, m.num_states):
        problems.append(f"transition table shape {m.transition.shape}, "
                        f"expected {(m.num_states, A, m.num_states)}")
    if not 0.0 <= m.discount < 1.0:
        problems.append(f"discount {m.discount} outside [0, 1)")
    if problems:
        return problems

    if (m.transition < -ROW_TOL).any():
        problems.append("negative transition probability")
    sums = m.transition.sum(axis=2)
    bad = np.argwhere(np.abs(sums - 1.0) > 1e-10)
    for s, a in bad[:5]:
        problems.append(f"transition row (state {s}, joint action {a}) sums to {sums[s, a]:.6g}")
    if bad.shape[0] > 5:
        problems.append(f"... and {bad.shape[0] - 5} more transition rows")

    if (m.initial_dist < -ROW_TOL).any():
        problems.append("initial distribution has a negative entry")
    if abs(m.initial_dist.sum() - 1.0) > ROW_TOL:
        problems.append(f"initial distribution sums to {m.initial_dist.sum():.6g}")
    if m.initial_dist.shape != (m.num_states,):
        problems.append("initial distribution has wrong length")

    for s in m.terminal_states:
        if not (0 <= s < m.num_states):
            problems.append(f"terminal state {s} out of range")
            continue
        if np.abs(m.reward[s]).max() > ROW_TOL:
            problems.append(f"terminal state {s} has nonzero reward")
        expect = np.zeros(m.num_states)
        expect[s] = 1.0
        if np.abs(m.transition[s] - expect[None, :]).max() > 1e-10:
            problems.append(f"terminal state {s} does not self-loop with probability 1")
    return problems


def joint_action_iter(m: Mmdp, coalition) -> list[tuple[int, ...]]:
    """All action tuples of the coalition (sorted agent order), lexicographic.

    The empty coalition yields the single empty tuple.
    """
    agents = sorted(coalition)
    for i in agents:
        if not 0 <= i < m.num_agents:
            raise ValueError(f"agent index {i} out of range")
    return list(itertools.product(*(range(m.action_counts[i]) for i in agents)))


def policy_transition_reward(m: Mmdp, behavior) -> tuple[np.ndarray, np.ndarray]:
    """Per-state Markov chain (P_pi, R_pi) induced by a behavior."""
    table = as_joint_table(m, behavior)
    r_pi = (table * m.reward).sum(axis=1)
    p_pi = np.einsum("sa,sat->st", table, m.transition)
    return p_pi, r_pi


def _solve_linear(p_pi: np.ndarray, r_pi: np.ndarray, gamma: float) -> np.ndarray:
    n = p_pi.shape[0]
    return np.linalg.solve(np.eye(n) - gamma * p_pi, r_pi)


def _solve_richardson(p_pi: np.ndarray, r_pi: np.ndarray, gamma: float) -> np.ndarray:
    v = np.zeros_like(r_pi)
    cap = 10 * math.ceil(math.log(1e-12) / math.log(gamma)) if gamma > 0 else 1
    for _ in range(max(cap, 1)):
        nxt = r_pi + gamma * (p_pi @ v)
        if np.abs(nxt - v).max() <= 1e-12:
            return nxt
        v = nxt
    return v


def policy_values(m: Mmdp, behavior) -> np.ndarray:
    """State values V_pi, from a direct linear solve (small models) or iteration."""
    p_pi, r_pi = policy_transition_reward(m, behavior)
    if m.num_states <= 2000:
        return _solve_linear(p_pi, r_pi, m.discount)
    return _solve_richardson(p_pi, r_pi, m.discount)


def evaluate_return(m: Mmdp, behavior) -> float:
    """Expected discounted return J(pi) under the initial distribution."""
    return float(m.initial_dist @ policy_values(m, behavior))


# ---------------------------------------------------------------------------
# Model file I/O (JSON-structured text)

def save_model(m: Mmdp, path) -> None:
    rewards = [[int(s), int(a), float(m.reward[s, a])]
               for s, a in zip(*np.nonzero(m.reward))]
    transitions = [[int(s), int(a), int(t), float(p)]
                   for (s, a, t), p in np.ndenumerate(m.transition) if p != 0.0]
    doc = {
        "num_states": m.num_states,
        "num_agents": m.num_agents,
        "action_counts": list(m.action_counts),
        "gamma": m.discount,
        "initial_dist": m.initial_dist.tolist(),
        "terminals": sorted(m.terminal_states),
        "rewards": rewards,
        "transitions": transitions,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_model(path) -> Mmdp:
    """Parse the JSON model format.

    Omitted reward entries default to 0; a (state, joint action) pair with no
    transition entries at all is an error.
    """
    with open(path) as fh:
        doc = json.load(fh)
    try:
        num_states = int(doc["num_states"])
        num_agents = int(doc["num_agents"])
        action_counts = tuple(int(k) for k in doc["action_counts"])
        gamma = float(doc["gamma"])
        initial = np.asarray(doc["initial_dist"], dtype=float)
        terminals = frozenset(int(s) for s in doc.get("terminals", []))
    except KeyError as exc:
        raise ValueError(f"model file missing field {exc}") from exc
    if len(action_counts) != num_agents:
        raise ValueError("action_counts length does not match num_agents")
    A = int(np.prod(action_counts))
    reward = np.zeros((num_states, A))
    for s, a, r in doc.get("rewards", []):
        reward[int(s), int(a)] = float(r)
    transition = np.zeros((num_states, A, num_states))
    seen = np.zeros((num_states, A), dtype=bool)
    for s, a, t, p in doc.get("transitions", []):
        transition[int(s), int(a), int(t)] += float(p)
        seen[int(s), int(a)] = True
    missing = np.argwhere(~seen)
    if missing.size:
        s, a = missing[0]
        raise ValueError(f"transition row omitted for state {s}, joint action {a} "
                         f"({missing.shape[0]} rows missing in total)")
    return Mmdp(num_states, num_agents, action_counts, reward, transition,
                gamma, initial, terminals)


def save_policy(pi: JointPolicy, path) -> None:
    with open(path, "w") as fh:
        json.dump({"agents": [ap.probs.tolist() for ap in pi.agents]}, fh)


def load_policy(path) -> JointPolicy:
    with open(path) as fh:
        doc = json.load(fh)
    if "agents" not in doc:
        raise ValueError("policy file missing 'agents' field")
    return JointPolicy(tuple(AgentPolicy(np.asarray(rows, dtype=float))
                             for rows in doc["agents"]))
