"""Free-energy quantities and discrete planning.

Covers the thermodynamic free energy A = U - TS, the variational free
energy of an approximate posterior (a KL divergence to the exact
posterior), expected free energy of an action sequence under a
generative model, standard max-form value iteration, a min-form variant
whose per-step cost is the one-step expected free energy, and mean-field
coordinate-ascent variational inference over small factorized posteriors.

Sign convention: the expected-free-energy expressions below ADD the
expected reward to the transition-entropy term and are minimized as
written, so by default the reward table effectively acts as a cost.
Every such function takes ``negate_reward``; pass True to flip the
reward's sign so that larger rewards are preferred under minimization.
The default (False) keeps the literal additive form.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .distributions import DiscreteDistribution, as_distribution
from .errors import CapacityError, ConvergenceError, DomainError, ValidationError
from .info import kl_divergence

MAX_MF_VARIABLES = 3
MAX_MF_VALUES = 16
MAX_SWEEPS = 100_000

__all__ = [
    "helmholtz_free_energy",
    "variational_free_energy",
    "GenerativeModel",
    "expected_free_energy",
    "DiscreteMDP",
    "mdp_from_json",
    "mdp_to_json",
    "value_iteration",
    "fe_value_iteration",
    "ValueIterationResult",
    "FactorizedPosterior",
    "mean_field_update",
    "mean_field_kl",
]


def helmholtz_free_energy(internal_energy: float, temperature: float, entropy: float) -> float:
    """A = U - T S."""
    for name, value in (("U", internal_energy), ("T", temperature), ("S", entropy)):
        if not math.isfinite(value):
            raise ValidationError(f"helmholtz_free_energy: {name} must be finite, got {value!r}")
    if temperature < 0:
        raise ValidationError(f"helmholtz_free_energy: T must be >= 0, got {temperature!r}")
    return internal_energy - temperature * entropy


def variational_free_energy(q, prior, likelihood, evidence_index=None) -> float:
    """KL from the approximate posterior q(Z) to the exact posterior P(Z|X).

    ``likelihood`` is either the vector P(x_obs | Z) over hidden states,
    or a (n_states, n_obs) matrix from which ``evidence_index`` selects
    the observed column. The exact posterior is prior * likelihood,
    normalized. Zero iff q equals the exact posterior.
    """
    q = as_distribution(q)
    prior = as_distribution(prior)
    lik = np.asarray(likelihood, dtype=float)
    if lik.ndim == 2:
        if evidence_index is None:
            raise ValidationError("variational_free_energy: matrix likelihood needs evidence_index")
        if not 0 <= int(evidence_index) < lik.shape[1]:
            raise ValidationError(f"variational_free_energy: evidence_index {evidence_index} out of range")
        lik = lik[:, int(evidence_index)]
    if lik.ndim != 1 or lik.size != len(prior):
        raise ValidationError("variational_free_energy: likelihood must give one value per hidden state")
    if np.any(lik < 0) or not np.all(np.isfinite(lik)):
        raise ValidationError("variational_free_energy: likelihood values must be finite and >= 0")
    if len(q) != len(prior):
        raise DomainError("variational_free_energy: q and prior must share the hidden state space")
    joint = prior.probs * lik
    total = joint.sum()
    if total <= 0:
        raise DomainError("variational_free_energy: evidence has zero probability under the model")
    posterior = DiscreteDistribution(joint / total)
    return kl_divergence(q, posterior)


@dataclass(frozen=True)
class GenerativeModel:
    """Discrete generative model for roll-outs.

    prior: P(s) over n_states. likelihood[s, o] = P(o | s), rows
    stochastic. transition[a, s, s'] = Q(s' | s, a), rows stochastic in
    the last axis. reward[o, s] = r(o, s).
    """

    prior: DiscreteDistribution
    likelihood: np.ndarray
    transition: np.ndarray
    reward: np.ndarray

    def __post_init__(self):
        prior = as_distribution(self.prior)
        lik = np.asarray(self.likelihood, dtype=float)
        trans = np.asarray(self.transition, dtype=float)
        reward = np.asarray(self.reward, dtype=float)
        n = len(prior)
        if lik.ndim != 2 or lik.shape[0] != n:
            raise ValidationError(f"GenerativeModel: likelihood must be (n_states={n}, n_obs)")
        n_obs = lik.shape[1]
        if np.any(lik < 0) or np.max(np.abs(lik.sum(axis=1) - 1.0)) > 1e-9:
            raise ValidationError("GenerativeModel: likelihood rows must be distributions")
        if trans.ndim != 3 or trans.shape[1:] != (n, n):
            raise ValidationError(f"GenerativeModel: transition must be (n_actions, {n}, {n})")
        if np.any(trans < 0) or np.max(np.abs(trans.sum(axis=2) - 1.0)) > 1e-9:
            raise ValidationError("GenerativeModel: transition rows must be distributions")
        if reward.shape != (n_obs, n):
            raise ValidationError(f"GenerativeModel: reward must be (n_obs={n_obs}, n_states={n})")
        if not np.all(np.isfinite(reward)):
            raise ValidationError("GenerativeModel: rewards must be finite")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "likelihood", lik)
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "reward", reward)

    @property
    def n_states(self) -> int:
        return len(self.prior)

    @property
    def n_actions(self) -> int:
        return self.transition.shape[0]

    @property
    def n_obs(self) -> int:
        return self.likelihood.shape[1]

    def expected_reward_per_state(self) -> np.ndarray:
        """E[r(o, s) | s] = sum_o P(o|s) r(o, s), one value per state."""
        return np.einsum("so,os->s", self.likelihood, self.reward)

    def transition_entropy(self) -> np.ndarray:
        """H(Q(. | s, a)) in nats, shaped (n_actions, n_states)."""
        t = self.transition
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(t > 0, t * np.log(t), 0.0)
        return -terms.sum(axis=2)


def expected_free_energy(
    policy: Sequence[int],
    model: GenerativeModel,
    start: DiscreteDistribution = None,
    negate_reward: bool = False,
) -> float:
    """Roll out an action sequence and accumulate E[r(o,s) - ln Q(s'|s,a)].

    The expectation at step t is under the propagated state distribution;
    the -ln term contributes the expected transition entropy. An empty
    policy scores 0. See the module docstring for ``negate_reward``.
    """
    start = model.prior if start is None else as_distribution(start)
    if len(start) != model.n_states:
        raise ValidationError("expected_free_energy: start distribution has wrong support size")
    reward_sign = -1.0 if negate_reward else 1.0
    r_per_state = model.expected_reward_per_state()
    entropies = model.transition_entropy()
    p = start.probs.copy()
    total = 0.0
    for action in policy:
        a = int(action)
        if not 0 <= a < model.n_actions:
            raise ValidationError(f"expected_free_energy: action {a} out of range")
        total += reward_sign * float(p @ r_per_state) + float(p @ entropies[a])
        p = p @ model.transition[a]
    return total


@dataclass(frozen=True)
class DiscreteMDP:
    """Tabular MDP: transition[s, a, s'] = P(s'|s,a), reward[s, a], discount < 1."""

    transition: np.ndarray
    reward: np.ndarray
    gamma: float

    def __post_init__(self):
        trans = np.asarray(self.transition, dtype=float)
        reward = np.asarray(self.reward, dtype=float)
        if trans.ndim != 3 or trans.shape[0] != trans.shape[2]:
            raise ValidationError("DiscreteMDP: transition must be (n_states, n_actions, n_states)")
        n_states, n_actions = trans.shape[0], trans.shape[1]
        if reward.shape != (n_states, n_actions):
            raise ValidationError(f"DiscreteMDP: reward must be ({n_states}, {n_actions})")
        if np.any(trans < 0) or np.max(np.abs(trans.sum(axis=2) - 1.0)) > 1e-9:
            raise ValidationError("DiscreteMDP: transition rows must sum to 1")
        if not np.all(np.isfinite(reward)):
            raise ValidationError("DiscreteMDP: rewards must be finite")
        if not 0 <= self.gamma < 1:
            raise ValidationError(f"DiscreteMDP: gamma must be in [0, 1), got {self.gamma!r}")
        object.__setattr__(self, "transition", trans)
        object.__setattr__(self, "reward", reward)
        object.__setattr__(self, "gamma", float(self.gamma))

    @property
    def n_states(self) -> int:
        return self.transition.shape[0]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[1]


def mdp_from_json(text: str) -> DiscreteMDP:
    payload = json.loads(text)
    missing = {"n_states", "n_actions", "gamma", "transition", "reward"} - set(payload)
    if missing:
        raise ValidationError(f"MDP JSON missing keys: {sorted(missing)}")
    mdp = DiscreteMDP(np.asarray(payload["transition"]), np.asarray(payload["reward"]), payload["gamma"])
    if mdp.n_states != payload["n_states"] or mdp.n_actions != payload["n_actions"]:
        raise ValidationError("MDP JSON: declared sizes disagree with table shapes")
    return mdp


def mdp_to_json(mdp: DiscreteMDP) -> str:
    return json.dumps(
        {
            "n_states": mdp.n_states,
            "n_actions": mdp.n_actions,
            "gamma": mdp.gamma,
            "transition": mdp.transition.tolist(),
            "reward": mdp.reward.tolist(),
        },
        sort_keys=True,
    )


class ValueIterationResult(NamedTuple):
    values: np.ndarray
    policy: np.ndarray
    iterations: int
    residual: float
    sup_diffs: Tuple[float, ...]


def _iterate_values(q_of_v, n_states: int, tolerance: float, pick) -> ValueIterationResult:
    # q_of_v(V) -> (n_states, n_actions) table; pick = max / min reducer
    values = np.zeros(n_states)
    diffs: List[float] = []
    for iteration in range(1, MAX_SWEEPS + 1):
        q = q_of_v(values)
        new_values = pick(q, axis=1)
        diff = float(np.max(np.abs(new_values - values)))
        diffs.append(diff)
        values = new_values
        if diff < tolerance:
            q = q_of_v(values)
            backed_up = pick(q, axis=1)
            residual = float(np.max(np.abs(backed_up - values)))
            argpick = np.argmax if pick is np.max else np.argmin
            policy = argpick(q, axis=1).astype(int)
            return ValueIterationResult(values, policy, iteration, residual, tuple(diffs))
    raise ConvergenceError(f"value iteration did not reach tolerance {tolerance} in {MAX_SWEEPS} sweeps")


def value_iteration(mdp: DiscreteMDP, tolerance: float = 1e-10) -> ValueIterationResult:
    """Max-form dynamic programming: V(s) <- max_a [R(s,a) + gamma E V(s')].

    Stops when the sup-norm change drops below tolerance; the reported
    residual is the Bellman residual of the returned values (one extra
    backup), and sup_diffs records every sweep's change for contraction
    checks. The greedy policy breaks ties toward the lowest action index.
    """
    if not tolerance > 0:
        raise ValidationError(f"value_iteration: tolerance must be > 0, got {tolerance!r}")

    def q_of_v(values):
        return mdp.reward + mdp.gamma * np.einsum("san,n->sa", mdp.transition, values)

    return _iterate_values(q_of_v, mdp.n_states, tolerance, np.max)


def fe_value_iteration(
    model: GenerativeModel,
    tolerance: float = 1e-10,
    discount: float = 0.9,
    negate_reward: bool = False,
) -> ValueIterationResult:
    """Min-form dynamic programming on one-step expected free energy.

    The per-step cost is c(s,a) = E[r(o,s)] + H(Q(.|s,a)) (the -ln term
    in expectation), and V(s) <- min_a [c(s,a) + discount * E V(s')].
    The model carries no discount of its own, so it is a parameter here.
    See the module docstring for ``negate_reward``.
    """
    if not tolerance > 0:
        raise ValidationError(f"fe_value_iteration: tolerance must be > 0, got {tolerance!r}")
    if not 0 <= discount < 1:
        raise ValidationError(f"fe_value_iteration: discount must be in [0, 1), got {discount!r}")
    reward_sign = -1.0 if negate_reward else 1.0
    cost = reward_sign * model.expected_reward_per_state()[:, None] + model.transition_entropy().T

    def q_of_v(values):
        return cost + discount * np.einsum("asn,n->sa", model.transition, values)

    return _iterate_values(q_of_v, model.n_states, tolerance, np.min)


@dataclass(frozen=True)
class FactorizedPosterior:
    """Fully factorized distribution over hidden variables: q(h) = prod q_i(h_i)."""

    factors: Tuple[DiscreteDistribution, ...]

    def __post_init__(self):
        factors = tuple(as_distribution(f) for f in self.factors)
        if not factors:
            raise ValidationError("FactorizedPosterior: need at least one factor")
        object.__setattr__(self, "factors", factors)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(f) for f in self.factors)

    def joint_probs(self) -> np.ndarray:
        out = self.factors[0].probs
        for factor in self.factors[1:]:
            out = np.multiply.outer(out, factor.probs)
        return out

    @classmethod
    def uniform(cls, shape: Sequence[int]) -> "FactorizedPosterior":
        return cls(tuple(DiscreteDistribution.uniform(k) for k in shape))


def _check_mf_table(log_joint, shape: Tuple[int, ...]) -> np.ndarray:
    table = np.asarray(log_joint, dtype=float)
    if table.ndim != len(shape) or table.shape != shape:
        raise ValidationError(f"log joint shape {table.shape} does not match factors {shape}")
    if table.ndim > MAX_MF_VARIABLES or any(k > MAX_MF_VALUES for k in table.shape):
        raise CapacityError(
            f"mean field limited to {MAX_MF_VARIABLES} variables of {MAX_MF_VALUES} values, got {table.shape}"
        )
    if not np.all(np.isfinite(table)):
        raise ValidationError("log joint must be finite (strictly positive joint)")
    return table


def mean_field_update(
    posterior: FactorizedPosterior, joint_log_table, sweeps: int = 1
) -> FactorizedPosterior:
    """Coordinate-ascent sweeps: q_i(h_i) proportional to exp E_{q_-i}[ln p(h, x)].

    One sweep updates every factor once, in order, each update seeing the
    factors already refreshed this sweep. The KL divergence to the exact
    posterior never increases across a sweep. Zero sweeps returns the
    input unchanged.
    """
    if sweeps < 0:
        raise ValidationError(f"mean_field_update: sweeps must be >= 0, got {sweeps}")
    table = _check_mf_table(joint_log_table, posterior.shape)
    factors = list(posterior.factors)
    n = len(factors)
    for _ in range(sweeps):
        for i in range(n):
            moved = np.moveaxis(table, i, 0)
            rest = [factors[j].probs for j in range(n) if j != i]
            expected = moved
            for probs in reversed(rest):
                expected = expected @ probs
            shifted = np.exp(expected - expected.max())
            factors[i] = DiscreteDistribution(shifted / shifted.sum())
    return FactorizedPosterior(tuple(factors))


def mean_field_kl(posterior: FactorizedPosterior, joint_log_table) -> float:
    """KL(q || p(h|x)) for a factorized q against the normalized joint."""
    table = _check_mf_table(joint_log_table, posterior.shape)
    p = np.exp(table - table.max())
    p /= p.sum()
    q = posterior.joint_probs()
    return kl_divergence(
        DiscreteDistribution(q.ravel()), DiscreteDistribution(p.ravel())
    )
