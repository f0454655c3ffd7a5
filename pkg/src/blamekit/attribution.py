"""Blame attribution methods over a coalition inefficiency game.

All five methods consume a CharacteristicGame rather than a model and
behavior pair, so the planning cost is paid once and test generators can
inject synthetic games directly. `blame` is the convenience wrapper that
composes the game first.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .lp import LinearProgram, solve, solve_lexicographic
from .planning import CharacteristicGame, characteristic_game

PIVOTAL_TOL = 1e-9
_CLAMP_TOL = 1e-9


@dataclass(frozen=True)
class BlameAssignment:
    method: str
    blames: np.ndarray

    def __post_init__(self):
        blames = np.asarray(self.blames, dtype=float)
        if (blames < -_CLAMP_TOL).any():
            raise ValueError(f"{self.method}: negative blame {blames.min():.3g}")
        object.__setattr__(self, "blames", np.maximum(blames, 0.0))

    @property
    def total(self) -> float:
        return float(self.blames.sum())

    def csv_row(self) -> str:
        cells = [self.method] + [f"{b:.12g}" for b in self.blames]
        cells.append(f"{self.total:.12g}")
        return ",".join(cells)


@dataclass(frozen=True)
class Pivotality:
    flags: tuple[bool, ...]

    def csv_row(self) -> str:
        return ",".join("1" if f else "0" for f in self.flags)


def _subset_masks_without(n: int, i: int):
    """All masks over n agents that exclude bit i."""
    others = [j for j in range(n) if j != i]
    for sub in range(1 << (n - 1)):
        mask = 0
        for pos, j in enumerate(others):
            if sub >> pos & 1:
                mask |= 1 << j
        yield mask


def _weighted_marginals(game: CharacteristicGame, weights: np.ndarray,
                        method: str) -> BlameAssignment:
    n = game.num_agents
    sizes = np.array([bin(m).count("1") for m in range(1 << n)])
    blames = np.zeros(n)
    for i in range(n):
        for mask in _subset_masks_without(n, i):
            marginal = game.values[mask | 1 << i] - game.values[mask]
            blames[i] += weights[sizes[mask]] * marginal
    if (blames < -_CLAMP_TOL).any():
        raise ValueError(f"{method} produced blame below -{_CLAMP_TOL}; "
                         "the input game is not monotone")
    return BlameAssignment(method, blames)


def shapley(game: CharacteristicGame) -> BlameAssignment:
    """Shapley value of the inefficiency game."""
    n = game.num_agents
    n_fact = factorial(n)
    weights = np.array([factorial(s) * factorial(n - s - 1) / n_fact
                        for s in range(n)])
    return _weighted_marginals(game, weights, "SV")


def banzhaf(game: CharacteristicGame) -> BlameAssignment:
    """Banzhaf index: uniform weight 1/2^(n-1) on every marginal."""
    n = game.num_agents
    weights = np.full(n, 1.0 / (1 << (n - 1)))
    return _weighted_marginals(game, weights, "BI")


def marginal_contribution(game: CharacteristicGame) -> BlameAssignment:
    n = game.num_agents
    blames = np.array([game.value([i]) for i in range(n)])
    return BlameAssignment("MC", blames)


def mer(game: CharacteristicGame, tiebreak: int | None = None) -> BlameAssignment:
    """Maximum distributable blame under per-coalition rationality caps.

    Solves: maximize sum(beta) subject to sum_{i in S} beta_i <= value(S)
    for every nonempty coalition S, beta >= 0. The total is the same at
    every optimum; per-agent splits are not, so callers that need a
    deterministic vector pass `tiebreak` to secondarily maximize that
    agent's blame over the optimal face.
    """
    n = game.num_agents
    rows = []
    for mask in range(1, 1 << n):
        rows.append([1.0 if mask >> i & 1 else 0.0 for i in range(n)])
    lp = LinearProgram(np.ones(n), np.array(rows), game.values[1:])
    if tiebreak is None:
        sol = solve(lp)
    else:
        if not 0 <= tiebreak < n:
            raise ValueError(f"tiebreak agent {tiebreak} out of range")
        direction = np.zeros(n)
        direction[tiebreak] = 1.0
        sol = solve_lexicographic(lp, direction)
    if sol.status != "optimal":
        raise RuntimeError(f"rationality LP came back {sol.status}")
    return BlameAssignment("MER", sol.point)


def pivotality(game: CharacteristicGame) -> Pivotality:
    """An agent is pivotal when it has any strictly positive marginal,
    detected as a Shapley value above tolerance."""
    sv = shapley(game)
    return Pivotality(tuple(bool(b > PIVOTAL_TOL) for b in sv.blames))


def average_participation(game: CharacteristicGame) -> BlameAssignment:
    """Splits each coalition's inefficiency equally among its pivotal
    members, averaged over all coalitions."""
    n = game.num_agents
    pivotal = pivotality(game).flags
    w = 1.0 / ((1 << n) - 1)
    blames = np.zeros(n)
    for i in range(n):
        if not pivotal[i]:
            continue
        for mask in _subset_masks_without(n, i):
            others_pivotal = sum(1 for j in range(n)
                                 if mask >> j & 1 and pivotal[j])
            blames[i] += w * game.values[mask | 1 << i] / (others_pivotal + 1)
    return BlameAssignment("AP", blames)


METHODS = {
    "MER": mer,
    "MC": marginal_contribution,
    "SV": shapley,
    "BI": banzhaf,
    "AP": average_participation,
}


def blame(m, behavior, method: str, tiebreak: int | None = None) -> BlameAssignment:
    """Compose the inefficiency game and apply one attribution method."""
    try:
        fn = METHODS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}; "
                         f"choose from {sorted(METHODS)}") from None
    game = characteristic_game(m, behavior)
    if method == "MER":
        return fn(game, tiebreak)
    return fn(game)
