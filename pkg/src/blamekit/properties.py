"""Machine-checkable forms of the blame attribution axioms.

Each check returns a PropertyVerdict with an epsilon slack (0 means the
exact property). Premise equalities are tested with tolerance 1e-9, well
above the 1e-12 planning noise, so premises never trigger spuriously.
Witness strings report agents 1-indexed to match the beta_1..beta_n CSV
columns.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .attribution import BlameAssignment, blame, pivotality
from .mmdp import Mmdp, evaluate_return
from .planning import CharacteristicGame, mask_agents

PREMISE_TOL = 1e-9
SLACK = 1e-12


@dataclass(frozen=True)
class PropertyVerdict:
    property: str
    epsilon: float
    holds: bool
    witness: str | None = None

    def __post_init__(self):
        if self.holds and self.witness is not None:
            raise ValueError("witness given for a passing verdict")
        if not self.holds and self.witness is None:
            raise ValueError("failing verdict needs a witness")

    def csv_row(self) -> str:
        witness = self.witness or ""
        return f"{self.property},{self.epsilon:.12g},{str(self.holds).lower()},{witness}"


def _coalition_label(mask: int, n: int) -> str:
    agents = mask_agents(mask, n)
    return "{" + " ".join(str(i + 1) for i in agents) + "}"


def _blames(beta) -> np.ndarray:
    if isinstance(beta, BlameAssignment):
        return beta.blames
    return np.asarray(beta, dtype=float)


def check_validity(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    """Total blame must not exceed the grand-coalition inefficiency."""
    total = float(_blames(beta).sum())
    if total <= game.total + epsilon + SLACK:
        return PropertyVerdict("R_V", epsilon, True)
    return PropertyVerdict("R_V", epsilon, False,
                           f"total {total:.6g} exceeds {game.total:.6g}")


def check_efficiency(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    total = float(_blames(beta).sum())
    if abs(total - game.total) <= epsilon + SLACK:
        return PropertyVerdict("R_E", epsilon, True)
    return PropertyVerdict("R_E", epsilon, False,
                           f"total {total:.6g} differs from {game.total:.6g}")


def check_rationality(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    """No coalition may be blamed beyond its own inefficiency."""
    blames = _blames(beta)
    n = game.num_agents
    worst_gap, worst_mask = 0.0, -1
    for mask in range(1, 1 << n):
        coalition_total = sum(blames[i] for i in range(n) if mask >> i & 1)
        gap = coalition_total - game.values[mask]
        if gap > worst_gap:
            worst_gap, worst_mask = gap, mask
    if worst_gap <= epsilon + SLACK:
        return PropertyVerdict("R_R", epsilon, True)
    return PropertyVerdict(
        "R_R", epsilon, False,
        f"coalition {_coalition_label(worst_mask, n)} blamed "
        f"{worst_gap:.6g} beyond its inefficiency")


def check_avg_efficiency(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    """Total blame must equal the mean marginal inefficiency over coalitions."""
    total = float(_blames(beta).sum())
    target = float(game.values.sum()) / ((1 << game.num_agents) - 1)
    if abs(total - target) <= epsilon + SLACK:
        return PropertyVerdict("R_AE", epsilon, True)
    return PropertyVerdict("R_AE", epsilon, False,
                           f"total {total:.6g} differs from average {target:.6g}")


def _symmetric_pair(game: CharacteristicGame, i: int, j: int) -> bool:
    n = game.num_agents
    for mask in range(1 << n):
        if mask >> i & 1 or mask >> j & 1:
            continue
        if abs(game.values[mask | 1 << i] - game.values[mask | 1 << j]) > PREMISE_TOL:
            return False
    return True


def check_symmetry(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    blames = _blames(beta)
    n = game.num_agents
    for i in range(n):
        for j in range(i + 1, n):
            if not _symmetric_pair(game, i, j):
                continue
            if abs(blames[i] - blames[j]) > epsilon + SLACK:
                return PropertyVerdict(
                    "R_S", epsilon, False,
                    f"interchangeable agents {i + 1} and {j + 1} get "
                    f"{blames[i]:.6g} vs {blames[j]:.6g}")
    return PropertyVerdict("R_S", epsilon, True)


def _never_marginal(game: CharacteristicGame, i: int) -> bool:
    n = game.num_agents
    for mask in range(1 << n):
        if mask >> i & 1:
            continue
        if game.values[mask | 1 << i] - game.values[mask] > PREMISE_TOL:
            return False
    return True


def check_invariance(game: CharacteristicGame, beta, epsilon: float = 0.0) -> PropertyVerdict:
    blames = _blames(beta)
    for i in range(game.num_agents):
        if _never_marginal(game, i) and blames[i] > epsilon + SLACK:
            return PropertyVerdict(
                "R_I", epsilon, False,
                f"agent {i + 1} never marginal but blamed {blames[i]:.6g}")
    return PropertyVerdict("R_I", epsilon, True)


def _check_same_agents(game1: CharacteristicGame, game2: CharacteristicGame) -> None:
    if game1.num_agents != game2.num_agents:
        raise ValueError("games must share an agent set")


def check_contribution_monotonicity(game1: CharacteristicGame, beta1,
                                    game2: CharacteristicGame, beta2,
                                    epsilon: float = 0.0) -> PropertyVerdict:
    """Agents whose marginals dominate across every coalition must not be
    blamed less in the dominating instance."""
    _check_same_agents(game1, game2)
    b1, b2 = _blames(beta1), _blames(beta2)
    n = game1.num_agents
    for i in range(n):
        dominates = all(
            (game1.values[mask | 1 << i] - game1.values[mask])
            >= (game2.values[mask | 1 << i] - game2.values[mask]) - PREMISE_TOL
            for mask in range(1 << n) if not mask >> i & 1)
        if dominates and b1[i] < b2[i] - epsilon - SLACK:
            return PropertyVerdict(
                "R_CM", epsilon, False,
                f"agent {i + 1} dominates marginally but blame fell "
                f"{b1[i]:.6g} < {b2[i]:.6g}")
    return PropertyVerdict("R_CM", epsilon, True)


def check_performance_monotonicity(m: Mmdp, behavior, agent: int, pi_i, pi_i_prime,
                                   method: str, epsilon: float = 0.0,
                                   tiebreak: int | None = None) -> PropertyVerdict:
    """Across two unilateral deviations by `agent`, the better-performing
    policy must not attract more blame."""
    joint1 = behavior.replace(agent, pi_i)
    joint2 = behavior.replace(agent, pi_i_prime)
    j1 = evaluate_return(m, joint1)
    j2 = evaluate_return(m, joint2)
    if j1 > j2 + PREMISE_TOL:
        return PropertyVerdict("R_PerM", epsilon, True)
    b1 = blame(m, joint1, method, tiebreak).blames[agent]
    b2 = blame(m, joint2, method, tiebreak).blames[agent]
    if b1 >= b2 - epsilon - SLACK:
        return PropertyVerdict("R_PerM", epsilon, True)
    return PropertyVerdict(
        "R_PerM", epsilon, False,
        f"agent {agent + 1} performs worse (J {j1:.6g} vs {j2:.6g}) "
        f"yet gets less blame ({b1:.6g} < {b2:.6g})")


def check_cperf(m: Mmdp, behavior, agent: int, pi_i, pi_i_prime,
                method: str, epsilon: float = 0.0,
                tiebreak: int | None = None) -> PropertyVerdict:
    """Performance monotonicity restricted to deviations that leave every
    agent's pivotality unchanged."""
    from .planning import characteristic_game
    joint1 = behavior.replace(agent, pi_i)
    joint2 = behavior.replace(agent, pi_i_prime)
    g1 = characteristic_game(m, joint1)
    g2 = characteristic_game(m, joint2)
    if pivotality(g1).flags != pivotality(g2).flags:
        return PropertyVerdict("R_cPerM", epsilon, True)
    inner = check_performance_monotonicity(m, behavior, agent, pi_i, pi_i_prime,
                                           method, epsilon, tiebreak)
    if inner.holds:
        return PropertyVerdict("R_cPerM", epsilon, True)
    return PropertyVerdict("R_cPerM", epsilon, False, inner.witness)


def check_cpart(game1: CharacteristicGame, beta1,
                game2: CharacteristicGame, beta2,
                epsilon: float = 0.0) -> PropertyVerdict:
    """Across equal-pivotality instances, an agent whose coalitions are all
    at least as inefficient must not be blamed less."""
    _check_same_agents(game1, game2)
    if pivotality(game1).flags != pivotality(game2).flags:
        return PropertyVerdict("R_cParM", epsilon, True)
    b1, b2 = _blames(beta1), _blames(beta2)
    n = game1.num_agents
    for j in range(n):
        dominates = all(
            game1.values[mask | 1 << j] >= game2.values[mask | 1 << j] - PREMISE_TOL
            for mask in range(1 << n) if not mask >> j & 1)
        if dominates and b1[j] < b2[j] - epsilon - SLACK:
            return PropertyVerdict(
                "R_cParM", epsilon, False,
                f"agent {j + 1} participates in dominating coalitions but "
                f"blame fell {b1[j]:.6g} < {b2[j]:.6g}")
    return PropertyVerdict("R_cParM", epsilon, True)


def check_rcpart(game1: CharacteristicGame, beta1,
                 game2: CharacteristicGame, beta2,
                 epsilon: float = 0.0) -> PropertyVerdict:
    """Across equal-pivotality instances, blame increments are ordered like
    the coalition inefficiency increments, compared between agents of the
    same pivotality."""
    _check_same_agents(game1, game2)
    piv1 = pivotality(game1).flags
    if piv1 != pivotality(game2).flags:
        return PropertyVerdict("R_RcParM", epsilon, True)
    b1, b2 = _blames(beta1), _blames(beta2)
    n = game1.num_agents
    for j in range(n):
        for k in range(n):
            if j == k or piv1[j] != piv1[k]:
                continue
            premise = all(
                (game1.values[mask | 1 << j] - game2.values[mask | 1 << j])
                >= (game1.values[mask | 1 << k] - game2.values[mask | 1 << k])
                - PREMISE_TOL
                for mask in range(1 << n)
                if not mask >> j & 1 and not mask >> k & 1)
            if premise and (b1[j] - b2[j]) < (b1[k] - b2[k]) - epsilon - SLACK:
                return PropertyVerdict(
                    "R_RcParM", epsilon, False,
                    f"agent {j + 1} gains inefficiency faster than agent "
                    f"{k + 1} but blame moved {b1[j] - b2[j]:.6g} vs "
                    f"{b1[k] - b2[k]:.6g}")
    return PropertyVerdict("R_RcParM", epsilon, True)


def impossibility_fixture():
    """Two-agent one-step model on which no method can satisfy efficiency,
    symmetry, invariance and performance monotonicity together.

    Returns (model, behavior, pi_1, pi_1_prime): the all-zeros behavior, and
    agent 1's two deviations whose induced games are {0, 2, 2, 2} and
    {0, 1.1, 0, 1.1}.
    """
    from .mmdp import AgentPolicy, JointPolicy
    num_actions = 9
    reward = np.zeros((2, num_actions))
    transition = np.zeros((2, num_actions, 2))
    transition[:, :, 1] = 1.0
    probe = Mmdp(2, 2, (3, 3), reward, transition, 0.99,
                 np.array([1.0, 0.0]), frozenset({1}))
    for ja in range(num_actions):
        a1, a2 = probe.decode_joint(ja)
        if a1 == 0 and a2 == 0:
            r = 0.0
        elif (a1, a2) in ((0, 2), (2, 0), (2, 2)):
            r = 2.0
        else:
            r = 0.9
        reward[0, ja] = r
    model = Mmdp(2, 2, (3, 3), reward, transition, 0.99,
                 np.array([1.0, 0.0]), frozenset({1}))
    behavior = JointPolicy((AgentPolicy.deterministic(2, 3, 0),
                            AgentPolicy.deterministic(2, 3, 0)))
    pi_1 = AgentPolicy.deterministic(2, 3, 0)
    pi_1_prime = AgentPolicy.deterministic(2, 3, 1)
    return model, behavior, pi_1, pi_1_prime


def random_monotone_game(n: int, seed: int) -> CharacteristicGame:
    """Monotone set function with value 0 at the empty set, built from
    nonnegative increments along the subset lattice. Roughly a third of the
    increments are exactly zero so that non-pivotal agents and equality
    premises occur often."""
    rng = np.random.default_rng(seed)
    values = np.zeros(1 << n)
    masks = sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m))
    for mask in masks:
        if mask == 0:
            continue
        floor = max(values[mask & ~(1 << i)] for i in range(n) if mask >> i & 1)
        if rng.random() < 0.3:
            increment = 0.0
        else:
            increment = float(rng.uniform(0.0, 1.0))
        values[mask] = floor + increment
    return CharacteristicGame(n, values)
