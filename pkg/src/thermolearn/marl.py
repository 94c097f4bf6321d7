"""Mean-field multi-agent Q-learning on neighbor graphs.

Each agent keys its Q values on (state, own action, discretized mean
neighbor action) instead of the joint action profile, collapsing the
exponential joint-action space to a single averaged coordinate. The
benchmark environment is a stateless alignment game on a spin lattice:
actions are spins, and each agent's reward is its local alignment with
its neighbors, so maximizing reward minimizes the lattice energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Sequence, Tuple

import numpy as np

from .distributions import DiscreteDistribution
from .errors import DomainError, ValidationError
from .rng import RngStream
from .trace import Trace

DEFAULT_MEAN_BINS = 11

__all__ = [
    "NeighborGraph",
    "torus_graph",
    "mean_action",
    "discretize_mean",
    "QTable",
    "mf_q_update",
    "boltzmann_policy",
    "mf_value",
    "mf_actor_critic_grad",
    "IsingGameEnv",
    "run_ising_game",
    "IsingGameResult",
]


@dataclass(frozen=True)
class NeighborGraph:
    """Undirected neighbor structure as per-agent adjacency lists."""

    neighbors: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        lists = tuple(tuple(int(k) for k in row) for row in self.neighbors)
        n = len(lists)
        if n == 0:
            raise ValidationError("NeighborGraph: need at least one agent")
        for j, row in enumerate(lists):
            if len(set(row)) != len(row):
                raise ValidationError(f"NeighborGraph: repeated neighbor in list of agent {j}")
            for k in row:
                if not 0 <= k < n:
                    raise ValidationError(f"NeighborGraph: neighbor {k} of agent {j} out of range")
                if k == j:
                    raise ValidationError(f"NeighborGraph: self-loop at agent {j}")
                if j not in lists[k]:
                    raise ValidationError(f"NeighborGraph: edge {j}-{k} not symmetric")
        object.__setattr__(self, "neighbors", lists)

    @property
    def n_agents(self) -> int:
        return len(self.neighbors)

    @classmethod
    def from_edges(cls, n_agents: int, edges: Sequence[Tuple[int, int]]) -> "NeighborGraph":
        lists = [[] for _ in range(n_agents)]
        for i, j in edges:
            i, j = int(i), int(j)
            if not (0 <= i < n_agents and 0 <= j < n_agents):
                raise ValidationError(f"NeighborGraph: edge ({i}, {j}) out of range for {n_agents} agents")
            lists[i].append(j)
            lists[j].append(i)
        return cls(tuple(tuple(row) for row in lists))


def torus_graph(rows: int, cols: int) -> NeighborGraph:
    """Periodic 2-D lattice with 4-neighbor connectivity."""
    if rows < 1 or cols < 1:
        raise ValidationError("torus_graph: rows and cols must be >= 1")

    def idx(r, c):
        return (r % rows) * cols + (c % cols)

    lists = []
    for r in range(rows):
        for c in range(cols):
            seen = []
            for nr, nc in ((r - 1, c), (r + 1, c), (r, c - 1), (r, c + 1)):
                k = idx(nr, nc)
                if k != idx(r, c) and k not in seen:
                    seen.append(k)
            lists.append(tuple(seen))
    return NeighborGraph(tuple(lists))


def mean_action(neighbor_actions: Sequence[int], n_actions: int) -> np.ndarray:
    """Average of one-hot encodings; a point in the action simplex."""
    if n_actions < 1:
        raise ValidationError(f"mean_action: n_actions must be >= 1, got {n_actions}")
    actions = list(neighbor_actions)
    if not actions:
        raise DomainError("mean_action: empty neighborhood (the average divides by its size)")
    out = np.zeros(n_actions)
    for a in actions:
        a = int(a)
        if not 0 <= a < n_actions:
            raise ValidationError(f"mean_action: action {a} out of range")
        out[a] += 1.0
    return out / len(actions)


def discretize_mean(mean: np.ndarray, n_bins: int = DEFAULT_MEAN_BINS) -> Tuple[int, ...]:
    """Map each simplex coordinate in [0, 1] to one of n_bins equal bins."""
    if n_bins < 1:
        raise ValidationError(f"discretize_mean: n_bins must be >= 1, got {n_bins}")
    arr = np.asarray(mean, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValidationError("discretize_mean: coordinates must lie in [0, 1]")
    return tuple(min(n_bins - 1, int(x * n_bins)) for x in arr)


class QTable:
    """Sparse map (state, own action, mean-action bin) -> value; default 0."""

    def __init__(self):
        self.values: Dict[tuple, float] = {}

    def get(self, key: tuple) -> float:
        return self.values.get(key, 0.0)

    def set(self, key: tuple, value: float) -> None:
        if not math.isfinite(value):
            raise ValidationError(f"QTable: value for {key} must be finite, got {value!r}")
        self.values[key] = value

    def row(self, state, mean_bin, n_actions: int) -> np.ndarray:
        return np.array([self.get((state, a, mean_bin)) for a in range(n_actions)])

    def __len__(self) -> int:
        return len(self.values)


def mf_q_update(
    q: QTable, key: tuple, reward: float, next_value: float, alpha: float, gamma: float
) -> QTable:
    """Q(key) <- (1 - alpha) Q(key) + alpha (reward + gamma * next_value).

    ``next_value`` is the caller's estimate of the next state's value
    (single-sample bootstrap in the game loop). Updates in place and
    returns the same table.
    """
    if not 0 <= alpha <= 1:
        raise ValidationError(f"mf_q_update: alpha must be in [0, 1], got {alpha!r}")
    if not 0 <= gamma < 1:
        raise ValidationError(f"mf_q_update: gamma must be in [0, 1), got {gamma!r}")
    target = reward + gamma * next_value
    q.set(key, (1.0 - alpha) * q.get(key) + alpha * target)
    return q


def boltzmann_policy(q_row, temperature: float) -> DiscreteDistribution:
    """softmax(q / temperature), max-shifted."""
    row = np.asarray(q_row, dtype=float)
    if row.ndim != 1 or row.size == 0 or not np.all(np.isfinite(row)):
        raise ValidationError("boltzmann_policy: q_row must be a finite non-empty vector")
    if not (temperature > 0 and math.isfinite(temperature)):
        raise ValidationError(f"boltzmann_policy: temperature must be > 0, got {temperature!r}")
    z = row / temperature
    w = np.exp(z - z.max())
    return DiscreteDistribution(w / w.sum())


def mf_value(q_row, policy: DiscreteDistribution) -> float:
    """Expected Q under the policy: V = sum_a pi(a) Q(a)."""
    row = np.asarray(q_row, dtype=float)
    if row.shape != policy.probs.shape:
        raise ValidationError(
            f"mf_value: q_row length {row.shape} does not match policy {policy.probs.shape}"
        )
    return float(row @ policy.probs)


def mf_actor_critic_grad(policy_params, own_action: int, q_value: float) -> np.ndarray:
    """Policy-gradient step direction for a softmax policy.

    grad log pi(a) * Q = (onehot(a) - softmax(params)) * Q.
    """
    params = np.asarray(policy_params, dtype=float)
    if params.ndim != 1 or params.size == 0 or not np.all(np.isfinite(params)):
        raise ValidationError("mf_actor_critic_grad: params must be a finite non-empty vector")
    if not math.isfinite(q_value):
        raise ValidationError("mf_actor_critic_grad: q_value must be finite")
    a = int(own_action)
    if not 0 <= a < params.size:
        raise ValidationError(f"mf_actor_critic_grad: action {a} out of range")
    shifted = np.exp(params - params.max())
    pi = shifted / shifted.sum()
    onehot = np.zeros(params.size)
    onehot[a] = 1.0
    return (onehot - pi) * q_value


@dataclass(frozen=True)
class IsingGameEnv:
    """Stateless alignment game: binary actions are spins (0 -> -1, 1 -> +1);
    agent j's reward is spin_j * J * sum of neighbor spins."""

    graph: NeighborGraph
    coupling: float = 1.0

    n_actions = 2

    def __post_init__(self):
        if not math.isfinite(self.coupling):
            raise ValidationError("IsingGameEnv: coupling must be finite")
        for j, row in enumerate(self.graph.neighbors):
            if not row:
                raise DomainError(f"IsingGameEnv: agent {j} has no neighbors")

    def reward(self, agent: int, spins: Sequence[int]) -> float:
        total = 0
        for k in self.graph.neighbors[agent]:
            total += spins[k]
        return float(spins[agent] * self.coupling * total)


class IsingGameResult(NamedTuple):
    q_tables: List[QTable]
    trace: Trace
    final_spins: np.ndarray


def run_ising_game(
    env: IsingGameEnv,
    episodes: int,
    steps_per_episode: int,
    alpha: float,
    gamma: float,
    temperature_schedule,
    rng: RngStream,
    n_bins: int = DEFAULT_MEAN_BINS,
) -> IsingGameResult:
    """Independent mean-field Q-learners playing the alignment game.

    One shared dummy state; per step, agents act in id order: observe the
    mean neighbor action from the live spin configuration, sample a spin
    from the Boltzmann policy at the episode's temperature, collect the
    local alignment reward, and apply the mean-field Q update with a
    same-key bootstrap value. Spins persist across episodes; the trace
    logs |mean spin| at the end of each episode.

    ``temperature_schedule`` is a CoolingSchedule or any callable mapping
    the episode index to a positive temperature.
    """
    if episodes < 1 or steps_per_episode < 1:
        raise ValidationError("run_ising_game: episodes and steps_per_episode must be >= 1")
    if not 0 <= alpha <= 1:
        raise ValidationError(f"run_ising_game: alpha must be in [0, 1], got {alpha!r}")
    if not 0 <= gamma < 1:
        raise ValidationError(f"run_ising_game: gamma must be in [0, 1), got {gamma!r}")
    if hasattr(temperature_schedule, "temperature"):
        temp_at = temperature_schedule.temperature
    elif callable(temperature_schedule):
        temp_at = temperature_schedule
    else:
        raise ValidationError("run_ising_game: temperature_schedule must be a schedule or callable")

    graph = env.graph
    n = graph.n_agents
    coupling = env.coupling
    neighbor_lists = [list(row) for row in graph.neighbors]
    inv_deg = [1.0 / len(row) for row in neighbor_lists]
    state = 0

    spins = [int(s) for s in (rng.generator.integers(0, 2, n) * 2 - 1)]
    tables = [QTable() for _ in range(n)]
    mags = np.empty(episodes)
    uniforms = rng.generator.random((episodes, steps_per_episode, n)).tolist()

    exp = math.exp
    for episode in range(episodes):
        temperature = float(temp_at(episode))
        if not (temperature > 0 and math.isfinite(temperature)):
            raise ValidationError(f"run_ising_game: schedule gave T={temperature!r} at episode {episode}")
        inv_t = 1.0 / temperature
        for step in range(steps_per_episode):
            u_row = uniforms[episode][step]
            for j in range(n):
                up = 0
                for k in neighbor_lists[j]:
                    if spins[k] > 0:
                        up += 1
                frac_up = up * inv_deg[j]
                mean_bin = (
                    min(n_bins - 1, int((1.0 - frac_up) * n_bins)),
                    min(n_bins - 1, int(frac_up * n_bins)),
                )
                table = tables[j]
                q0 = table.get((state, 0, mean_bin))
                q1 = table.get((state, 1, mean_bin))
                # softmax over the two actions at the current temperature
                z0, z1 = q0 * inv_t, q1 * inv_t
                m = z0 if z0 > z1 else z1
                w0 = exp(z0 - m)
                w1 = exp(z1 - m)
                p0 = w0 / (w0 + w1)
                action = 0 if u_row[j] < p0 else 1
                spins[j] = 2 * action - 1
                total = 0
                for k in neighbor_lists[j]:
                    total += spins[k]
                reward = spins[j] * coupling * total
                next_value = p0 * q0 + (1.0 - p0) * q1
                mf_q_update(table, (state, action, mean_bin), reward, next_value, alpha, gamma)
        mags[episode] = abs(sum(spins)) / n

    trace = Trace({"episode": np.arange(episodes), "magnetization": mags})
    return IsingGameResult(tables, trace, np.array(spins, dtype=np.int8))
