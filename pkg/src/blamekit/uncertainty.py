"""Robust blame attribution under behavior-policy uncertainty.

The uncertainty set puts a per-agent, per-state half-L1 ball of radius
eps_max around an estimated behavior policy. Coalition values are then
bracketed by two robust recursions: an adversarial lower bound (the
complement conditional is chosen to minimize) and an optimistic upper bound
(chosen to maximize). The bracket feeds validity-preserving and
consistency-preserving (never over-blaming) variants of the five methods.

Chooser feasible sets, from tightest to loosest:
  - the exact factorized ball, usable when at most one complement agent is
    uncertain (any arity; the minimization needs a small LP) and, for
    maximization only, when every uncertain complement agent is binary
    (segment corners);
  - the relaxed box over joint conditionals, which drops factorization and
    bounds each joint probability by the product of per-agent interval
    endpoints. Always available; bounds stay one-sided, just looser.
The default picks the tightest applicable set per subproblem; exact=False
forces the relaxed box, exact=True raises where no exact path exists.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from math import factorial

import numpy as np

from .attribution import PIVOTAL_TOL, BlameAssignment, mer, shapley
from .lp import LinearProgram, solve
from .mmdp import AgentPolicy, JointPolicy, Mmdp
from .planning import (CharacteristicGame, best_response,
                       characteristic_game, coalition_action_index,
                       coalition_mask, mask_agents, solve_mdp)

RESIDUAL_TOL = 1e-12
RESIDUAL_FLOOR = 1e-10
MAX_SWEEPS = 50000
_EDGE_TOL = 1e-15


@dataclass(frozen=True)
class UncertaintySet:
    """Half-L1 balls of radius `radius` around `center`, per agent and state.

    `uncertain_agents` restricts the uncertainty to a subset of agents (the
    rest are known exactly); None means every agent. `truth` is carried only
    for consistency assertions and never influences the bounds.
    """

    center: JointPolicy
    radius: float
    truth: JointPolicy | None = None
    uncertain_agents: frozenset[int] | None = None

    def agent_radius(self, agent: int) -> float:
        if self.uncertain_agents is None or agent in self.uncertain_agents:
            return self.radius
        return 0.0

    def contains(self, policy: JointPolicy, tol: float = 1e-9) -> bool:
        for i, (ap, cp) in enumerate(zip(policy.agents, self.center.agents)):
            deviation = 0.5 * np.abs(ap.probs - cp.probs).sum(axis=1).max()
            if deviation > self.agent_radius(i) + tol:
                return False
        return True

    def validate(self) -> list[str]:
        problems = []
        if self.radius < 0:
            problems.append(f"radius {self.radius} is negative")
        problems.extend(self.center.validate())
        if self.truth is not None and not self.contains(self.truth):
            problems.append("declared truth lies outside the set")
        return problems

    def content_key(self) -> bytes:
        import hashlib
        h = hashlib.sha256()
        for ap in self.center.agents:
            h.update(ap.probs.tobytes())
        h.update(np.float64(self.radius).tobytes())
        agents = (sorted(self.uncertain_agents)
                  if self.uncertain_agents is not None else [-1])
        h.update(np.array(agents, dtype=np.int64).tobytes())
        return h.digest()


def _sample_ball_row(rng: np.random.Generator, p: np.ndarray, eps: float) -> np.ndarray:
    """Uniform draw from {q on the simplex : 0.5 * L1(q, p) <= eps}.

    The slice is a (k-1)-dimensional polytope inside the zero-sum hyperplane
    through p; rejection from a bounding box in the first k-1 deviation
    coordinates is uniform because the parameterization is linear.
    """
    k = p.size
    if eps <= 0 or k == 1:
        return p.copy()
    bound = 2.0 * eps
    for _ in range(4000):
        d = rng.uniform(-bound, bound, size=(256, k - 1))
        full = np.concatenate([d, -d.sum(axis=1, keepdims=True)], axis=1)
        ok = (np.abs(full).sum(axis=1) <= bound) & ((p + full) >= -1e-15).all(axis=1)
        hits = np.flatnonzero(ok)
        if hits.size:
            q = np.clip(p + full[hits[0]], 0.0, None)
            return q / q.sum()
    raise RuntimeError("ball sampler failed to accept a draw")


def sample_center(truth: JointPolicy, eps_max: float, seed: int,
                  uncertain_agents: frozenset[int] | None = None) -> UncertaintySet:
    """Draw an estimated behavior whose ball of radius eps_max contains the
    truth (guaranteed by the ball's symmetry). Deterministic per seed."""
    if eps_max < 0:
        raise ValueError("eps_max must be nonnegative")
    rng = np.random.default_rng(seed)
    agents = []
    for i, ap in enumerate(truth.agents):
        if uncertain_agents is not None and i not in uncertain_agents:
            agents.append(ap)
            continue
        rows = np.array([_sample_ball_row(rng, ap.probs[s], eps_max)
                         for s in range(ap.probs.shape[0])])
        agents.append(AgentPolicy(rows))
    return UncertaintySet(JointPolicy(tuple(agents)), eps_max, truth,
                          uncertain_agents)


@dataclass(frozen=True)
class RelaxedBox:
    """Per-state bounds on a joint conditional over some agents' actions:
    each entry is the product of clipped per-agent interval endpoints."""

    lower: np.ndarray
    upper: np.ndarray

    @staticmethod
    def for_agents(m: Mmdp, uset: UncertaintySet, agents) -> "RelaxedBox":
        agents = sorted(agents)
        lower = np.ones((m.num_states, 1))
        upper = np.ones((m.num_states, 1))
        for i in agents:
            probs = uset.center.agents[i].probs
            r = uset.agent_radius(i)
            lo = np.maximum(probs - r, 0.0)
            hi = np.minimum(probs + r, 1.0)
            lower = (lower[:, :, None] * lo[:, None, :]).reshape(m.num_states, -1)
            upper = (upper[:, :, None] * hi[:, None, :]).reshape(m.num_states, -1)
        return RelaxedBox(lower, upper)


def _topological_order(m: Mmdp) -> list[int] | None:
    """States ordered so transitions only point forward, or None if the
    model has a cycle beyond terminal self-loops."""
    reach = m.transition.max(axis=1) > _EDGE_TOL
    succ = [set(np.flatnonzero(reach[s])) - {s} for s in range(m.num_states)]
    for s in range(m.num_states):
        if s not in m.terminal_states and reach[s, s]:
            return None
    indeg = np.zeros(m.num_states, dtype=np.int64)
    for s in range(m.num_states):
        for t in succ[s]:
            indeg[t] += 1
    queue = [s for s in range(m.num_states) if indeg[s] == 0]
    order = []
    while queue:
        s = queue.pop()
        order.append(s)
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                queue.append(t)
    return order if len(order) == m.num_states else None


class _CoalitionProblem:
    """Precomputation for one (coalition, mode) robust recursion."""

    def __init__(self, m: Mmdp, uset: UncertaintySet, mask: int, mode: str,
                 exact: bool | None):
        self.mode = mode
        self.coalition = mask_agents(mask, m.num_agents)
        members = set(self.coalition)
        self.others = [j for j in range(m.num_agents) if j not in members]
        self.idx = coalition_action_index(m, self.coalition)
        self.num_c, self.num_d = self.idx.shape
        self.uncertain = [j for j in self.others if uset.agent_radius(j) > 0]
        # per-complement-agent action of each complement column
        cols = {}
        dims = [m.action_counts[j] for j in self.others]
        for d in range(self.num_d):
            rest = d
            parts = []
            for kdim in reversed(dims):
                parts.append(rest % kdim)
                rest //= kdim
            parts.reverse()
            for j, a in zip(self.others, parts):
                cols.setdefault(j, np.zeros(self.num_d, dtype=np.int64))[d] = a
        self.cols = cols

        def product_table(agent_subset):
            table = np.ones((m.num_states, self.num_d))
            for j in agent_subset:
                table *= uset.center.agents[j].probs[:, cols[j]]
            return table

        self.center_table = product_table(self.others)
        if not self.uncertain:
            self.path = "fixed"
        elif exact is False:
            self.path = "box"
        elif len(self.uncertain) == 1:
            self.path = "ball"
        elif mode == "max" and all(m.action_counts[j] == 2 for j in self.uncertain):
            self.path = "corner"
        elif exact is True:
            raise ValueError(
                f"no exact chooser for coalition {self.coalition} in {mode} "
                "mode; several uncertain complement agents with non-binary "
                "actions require the relaxed box")
        else:
            self.path = "box"

        if self.path == "ball":
            u = self.uncertain[0]
            self.ball_agent = u
            self.ball_rows = uset.center.agents[u].probs
            self.ball_eps = uset.agent_radius(u)
            self.ball_col = cols[u]
            self.certain_table = product_table(j for j in self.others if j != u)
        elif self.path == "corner":
            self.certain_table = product_table(
                j for j in self.others if j not in self.uncertain)
            self.corner_factors = []
            for j in self.uncertain:
                probs = uset.center.agents[j].probs
                r = uset.agent_radius(j)
                lo0 = np.maximum(probs[:, 0] - r, 0.0)
                hi0 = np.minimum(probs[:, 0] + r, 1.0)
                ends = np.stack([np.stack([lo0, 1.0 - lo0], axis=1),
                                 np.stack([hi0, 1.0 - hi0], axis=1)], axis=1)
                # ends[s, end, action] gathered per complement column
                self.corner_factors.append(ends[:, :, cols[j]])
            self.corner_combos = [
                tuple(combo >> b & 1 for b in range(len(self.uncertain)))
                for combo in range(1 << len(self.uncertain))]
        elif self.path == "box":
            box = RelaxedBox.for_agents(m, uset, self.others)
            self.box_lower, self.box_upper = box.lower, box.upper

    def solve_state(self, b: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        """Chooser value and complement conditional for one state; b has
        shape (num coalition actions, num complement actions)."""
        if self.path == "fixed":
            q = self.center_table[s]
            return float((b @ q).max()), q
        if self.path == "ball":
            folded = self._fold(b, s)
            if self.mode == "max":
                return self._ball_max(folded, s)
            return self._ball_min(folded, s)
        if self.path == "corner":
            return self._corner_max(b, s)
        if self.mode == "max":
            return self._box_max(b, s)
        return self._box_min(b, s)

    def _fold(self, b: np.ndarray, s: int) -> np.ndarray:
        """Marginalize certain complement agents, leaving the ball agent."""
        k = self.ball_rows.shape[1]
        weighted = b * self.certain_table[s]
        folded = np.zeros((self.num_c, k))
        np.add.at(folded.T, self.ball_col, weighted.T)
        return folded

    def _expand(self, q_ball: np.ndarray, s: int) -> np.ndarray:
        return self.certain_table[s] * q_ball[self.ball_col]

    def _ball_max(self, folded: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        p = self.ball_rows[s]
        best_val, best_q = -np.inf, None
        for row in folded:
            val, q = _ball_row_max(row, p, self.ball_eps)
            if val > best_val:
                best_val, best_q = val, q
        return best_val, self._expand(best_q, s)

    def _ball_min(self, folded: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        p = self.ball_rows[s]
        k = p.size
        num_rows = folded.shape[0]
        a = np.zeros((num_rows + 2 * k + 3, 2 * k + 2))
        bounds = np.zeros(num_rows + 2 * k + 3)
        a[:num_rows, :k] = folded
        a[:num_rows, 2 * k] = -1.0
        a[:num_rows, 2 * k + 1] = 1.0
        eye = np.eye(k)
        r = num_rows
        a[r:r + k, :k] = eye
        a[r:r + k, k:2 * k] = -eye
        bounds[r:r + k] = p
        a[r + k:r + 2 * k, :k] = -eye
        a[r + k:r + 2 * k, k:2 * k] = -eye
        bounds[r + k:r + 2 * k] = -p
        a[r + 2 * k, k:2 * k] = 1.0
        bounds[r + 2 * k] = 2.0 * self.ball_eps
        a[r + 2 * k + 1, :k] = 1.0
        bounds[r + 2 * k + 1] = 1.0
        a[r + 2 * k + 2, :k] = -1.0
        bounds[r + 2 * k + 2] = -1.0
        c = np.zeros(2 * k + 2)
        c[2 * k] = -1.0
        c[2 * k + 1] = 1.0
        sol = solve(LinearProgram(c, a, bounds))
        if sol.status != "optimal":
            raise RuntimeError(f"adversary ball LP came back {sol.status}")
        return -sol.objective_value, self._expand(sol.point[:k], s)

    def _corner_max(self, b: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        base = self.certain_table[s]
        best_val, best_q = -np.inf, None
        for combo in self.corner_combos:
            q = base.copy()
            for factor, end in zip(self.corner_factors, combo):
                q *= factor[s, end]
            val = float((b @ q).max())
            if val > best_val:
                best_val, best_q = val, q
        return best_val, best_q

    def _box_max(self, b: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        lo, hi = self.box_lower[s], self.box_upper[s]
        best_val, best_q = -np.inf, None
        for row in b:
            q = lo.copy()
            remaining = 1.0 - lo.sum()
            for d in np.argsort(-row, kind="stable"):
                if remaining <= 1e-15:
                    break
                add = min(remaining, hi[d] - lo[d])
                q[d] += add
                remaining -= add
            val = float(row @ q)
            if val > best_val:
                best_val, best_q = val, q
        return best_val, best_q

    def _box_min(self, b: np.ndarray, s: int) -> tuple[float, np.ndarray]:
        lo, hi = self.box_lower[s], self.box_upper[s]
        k = self.num_d
        num_rows = b.shape[0]
        a = np.zeros((num_rows + 2 * k + 2, k + 2))
        bounds = np.zeros(num_rows + 2 * k + 2)
        a[:num_rows, :k] = b
        a[:num_rows, k] = -1.0
        a[:num_rows, k + 1] = 1.0
        eye = np.eye(k)
        r = num_rows
        a[r:r + k, :k] = eye
        bounds[r:r + k] = hi
        a[r + k:r + 2 * k, :k] = -eye
        bounds[r + k:r + 2 * k] = -lo
        a[r + 2 * k, :k] = 1.0
        bounds[r + 2 * k] = 1.0
        a[r + 2 * k + 1, :k] = -1.0
        bounds[r + 2 * k + 1] = -1.0
        c = np.zeros(k + 2)
        c[k] = -1.0
        c[k + 1] = 1.0
        sol = solve(LinearProgram(c, a, bounds))
        if sol.status != "optimal":
            raise RuntimeError(f"adversary box LP came back {sol.status}")
        return -sol.objective_value, sol.point[:k]


def _ball_row_max(b: np.ndarray, p: np.ndarray, eps: float) -> tuple[float, np.ndarray]:
    """Maximize q . b over the half-L1 ball of radius eps around p on the
    simplex: shift mass from the lowest-valued coordinates to the best one."""
    target = int(np.argmax(b))
    q = p.copy()
    budget = eps
    for j in np.argsort(b, kind="stable"):
        if j == target or budget <= 0 or b[target] - b[j] <= 0:
            continue
        take = min(budget, q[j])
        q[j] -= take
        q[target] += take
        budget -= take
    return float(q @ b), q


class RobustBounds:
    """Lower and upper bounds on every coalition's best-response value over
    an uncertainty set, memoized per coalition. Thread-safe."""

    def __init__(self, m: Mmdp, uset: UncertaintySet, exact: bool | None = None):
        problems = uset.validate()
        if problems:
            raise ValueError("invalid uncertainty set: " + "; ".join(problems))
        if len(uset.center.agents) != m.num_agents:
            raise ValueError("uncertainty set does not match the model")
        self.m = m
        self.uset = uset
        self.exact = exact
        self._lock = threading.Lock()
        self._values: dict[tuple[int, str], float] = {}
        self._max_table: np.ndarray | None = None
        self._topo = _topological_order(m)
        self._nonterminal = np.array(
            [s for s in range(m.num_states) if s not in m.terminal_states])

    def min_value(self, coalition) -> float:
        return self._bound(coalition_mask(coalition), "min")

    def max_value(self, coalition) -> float:
        return self._bound(coalition_mask(coalition), "max")

    def max_policy(self) -> np.ndarray:
        """A joint behavior table attaining max_value(()) over the chooser
        set; its exact evaluation equals that bound."""
        self._bound(0, "max")
        return self._max_table

    def _bound(self, mask: int, mode: str) -> float:
        key = (mask, mode)
        with self._lock:
            if key in self._values:
                return self._values[key]
        value, table = self._solve(mask, mode)
        with self._lock:
            self._values[key] = value
            if key == (0, "max"):
                self._max_table = table
        return value

    def _solve(self, mask: int, mode: str) -> tuple[float, np.ndarray | None]:
        m = self.m
        problem = _CoalitionProblem(m, self.uset, mask, mode, self.exact)
        if problem.path == "fixed":
            br = best_response(m, self.uset.center, problem.coalition)
            return br.value, problem.center_table if mask == 0 else None
        if self._topo is not None:
            v, q = self._backward_pass(problem)
        else:
            v, q = self._iterate(problem)
        table = q if mask == 0 else None
        return float(m.initial_dist @ v), table

    def _backed_up(self, problem: _CoalitionProblem, v: np.ndarray) -> np.ndarray:
        m = self.m
        q_future = m.reward + m.discount * (m.transition @ v)
        return q_future[np.arange(m.num_states)[:, None, None], problem.idx]

    def _backward_pass(self, problem: _CoalitionProblem):
        m = self.m
        v = np.zeros(m.num_states)
        q = problem.center_table.copy()
        for s in reversed(self._topo):
            if s in m.terminal_states:
                continue
            b = (m.reward[s, problem.idx]
                 + m.discount * (m.transition[s, problem.idx] @ v))
            v[s], q[s] = problem.solve_state(b, s)
        return v, q

    def _iterate(self, problem: _CoalitionProblem):
        m = self.m
        v = best_response(m, self.uset.center, problem.coalition).state_values
        q = None
        for sweep in range(MAX_SWEEPS):
            backed = self._backed_up(problem, v)
            values = np.zeros(m.num_states)
            q = problem.center_table.copy()
            for s in self._nonterminal:
                values[s], q[s] = problem.solve_state(backed[s], s)
            residual = float(np.abs(values - v).max())
            if residual <= RESIDUAL_TOL or (sweep >= 1000
                                            and residual <= RESIDUAL_FLOOR):
                return v, q
            v = self._evaluate(problem, q)
        raise RuntimeError(
            f"robust recursion did not converge within {MAX_SWEEPS} sweeps")

    def _evaluate(self, problem: _CoalitionProblem, q: np.ndarray) -> np.ndarray:
        """Exact value of the coalition's best response against a fixed
        complement conditional."""
        m = self.m
        rows = np.arange(m.num_states)[:, None, None]
        r = np.einsum("sd,scd->sc", q, m.reward[rows, problem.idx])
        p = np.einsum("sd,scdt->sct", q, m.transition[rows, problem.idx])
        v, _ = solve_mdp(r, p, m.discount)
        return v


_BOUNDS_CACHE: dict[bytes, RobustBounds] = {}
_BOUNDS_LOCK = threading.Lock()


def robust_bounds(m: Mmdp, uset: UncertaintySet,
                  exact: bool | None = None) -> RobustBounds:
    key = m.content_key() + uset.content_key() + str(exact).encode()
    with _BOUNDS_LOCK:
        hit = _BOUNDS_CACHE.get(key)
        if hit is not None:
            return hit
    bounds = RobustBounds(m, uset, exact)
    with _BOUNDS_LOCK:
        return _BOUNDS_CACHE.setdefault(key, bounds)


def robust_min_value(m: Mmdp, uset: UncertaintySet, coalition,
                     exact: bool | None = None) -> float:
    """Lower bound on the coalition's best-response value across behaviors
    in the set (equality when an exact chooser applies)."""
    return robust_bounds(m, uset, exact).min_value(coalition)


def robust_max_value(m: Mmdp, uset: UncertaintySet, coalition,
                     exact: bool | None = None) -> float:
    """Upper bound counterpart of robust_min_value; with the empty coalition
    this is the best plausible value of the behavior itself."""
    return robust_bounds(m, uset, exact).max_value(coalition)


def _monotone_closure(values: np.ndarray, n: int) -> np.ndarray:
    closed = values.copy()
    closed[0] = 0.0
    for mask in sorted(range(1, 1 << n), key=lambda x: bin(x).count("1")):
        floor = max(closed[mask & ~(1 << i)] for i in range(n) if mask >> i & 1)
        if closed[mask] < floor:
            closed[mask] = floor
    return closed


def sv_valid(m: Mmdp, uset: UncertaintySet,
             exact: bool | None = None) -> BlameAssignment:
    """Shapley value against the most favorable plausible behavior.

    Grading against the behavior that maximizes the return can only shrink
    the grand inefficiency, so the total never exceeds the true one. Under
    the forced relaxation the extracted table may be correlated and its raw
    coalition values can dip non-monotone; they are lifted to their monotone
    closure, which keeps the grand total and hence validity.
    """
    bounds = robust_bounds(m, uset, exact)
    table = bounds.max_policy()
    game = characteristic_game(m, table)
    values = _monotone_closure(game.values, m.num_agents)
    blames = shapley(CharacteristicGame(m.num_agents, values)).blames
    return BlameAssignment("SV_V", blames)


def _sandwich_gaps(bounds: RobustBounds, weights: np.ndarray) -> np.ndarray:
    """Per-agent weighted sums of [min(S + {i}) - max(S)] gaps."""
    n = bounds.m.num_agents
    blames = np.zeros(n)
    for i in range(n):
        for mask in range(1 << n):
            if mask >> i & 1:
                continue
            size = bin(mask).count("1")
            gap = (bounds._bound(mask | 1 << i, "min")
                   - bounds._bound(mask, "max"))
            blames[i] += weights[size] * gap
    return blames


def sv_blackstone(m: Mmdp, uset: UncertaintySet,
                  exact: bool | None = None) -> BlameAssignment:
    """Worst-case Shapley value: every marginal uses the adversarial value
    for the agent's coalition and the optimistic value without it, so no
    agent can be blamed beyond its true Shapley share."""
    bounds = robust_bounds(m, uset, exact)
    n = m.num_agents
    n_fact = factorial(n)
    weights = np.array([factorial(s) * factorial(n - s - 1) / n_fact
                        for s in range(n)])
    blames = np.maximum(_sandwich_gaps(bounds, weights), 0.0)
    return BlameAssignment("SV_BC", blames)


def bi_blackstone(m: Mmdp, uset: UncertaintySet,
                  exact: bool | None = None) -> BlameAssignment:
    bounds = robust_bounds(m, uset, exact)
    n = m.num_agents
    weights = np.full(n, 1.0 / (1 << (n - 1)))
    blames = np.maximum(_sandwich_gaps(bounds, weights), 0.0)
    return BlameAssignment("BI_BC", blames)


def mc_blackstone(m: Mmdp, uset: UncertaintySet,
                  exact: bool | None = None) -> BlameAssignment:
    bounds = robust_bounds(m, uset, exact)
    base = bounds.max_value(())
    blames = np.array([max(0.0, bounds.min_value((i,)) - base)
                       for i in range(m.num_agents)])
    return BlameAssignment("MC_BC", blames)


def _pessimistic_game(bounds: RobustBounds) -> CharacteristicGame:
    n = bounds.m.num_agents
    base = bounds.max_value(())
    values = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        values[mask] = max(0.0, bounds._bound(mask, "min") - base)
    return CharacteristicGame(n, values)


def mer_blackstone(m: Mmdp, uset: UncertaintySet, tiebreak: int | None = None,
                   exact: bool | None = None) -> BlameAssignment:
    """Rationality LP over worst-case coalition inefficiencies (clamped at 0
    so beta = 0 always stays feasible)."""
    game = _pessimistic_game(robust_bounds(m, uset, exact))
    blames = mer(game, tiebreak).blames
    return BlameAssignment("MER_BC", blames)


def ap_blackstone(m: Mmdp, uset: UncertaintySet,
                  exact: bool | None = None) -> BlameAssignment:
    """Participation split of worst-case inefficiencies. The divisor is the
    subset size plus one rather than the pivotal count; the certain-case
    formula weighs pivotal members only, and the two agree whenever every
    agent is pivotal."""
    bounds = robust_bounds(m, uset, exact)
    n = m.num_agents
    pivotal = sv_blackstone(m, uset, exact).blames > PIVOTAL_TOL
    base = bounds.max_value(())
    w = 1.0 / ((1 << n) - 1)
    blames = np.zeros(n)
    for i in range(n):
        if not pivotal[i]:
            continue
        for mask in range(1 << n):
            if mask >> i & 1:
                continue
            size = bin(mask).count("1")
            gap = max(0.0, bounds._bound(mask | 1 << i, "min") - base)
            blames[i] += w * gap / (size + 1)
    return BlameAssignment("AP_BC", blames)


def l1_distance(a, b) -> float:
    """Sum of absolute per-agent blame differences."""
    left = a.blames if isinstance(a, BlameAssignment) else np.asarray(a, dtype=float)
    right = b.blames if isinstance(b, BlameAssignment) else np.asarray(b, dtype=float)
    if left.shape != right.shape:
        raise ValueError("blame vectors differ in length")
    return float(np.abs(left - right).sum())
