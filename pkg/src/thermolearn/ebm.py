"""Energy-based losses over finite label spaces and a bipartite Boltzmann machine.

Label-space side: an energy table assigns one real energy per candidate
label; inference is the argmin, the Gibbs posterior exponentiates and
normalizes, and three training losses (perceptron, hinge, negative log
likelihood) compare the correct label's energy against the competition.

Machine side: binary {0,1} visible and hidden units with biases a, b and
cross weights W, energy E(v,h) = -a.v - b.h - v W h, inverse temperature
fixed at 1 (rescale the parameters for other temperatures). The +-1 spin
convention maps onto this one by v = (s+1)/2 with rescaled parameters.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .distributions import DiscreteDistribution
from .errors import CapacityError, ValidationError
from .rng import RngStream

MAX_EXACT_UNITS = 20

__all__ = [
    "ebl_infer",
    "gibbs_posterior",
    "GibbsPosterior",
    "loss_perceptron",
    "loss_hinge",
    "loss_nll",
    "BoltzmannMachine",
    "BMState",
    "bm_energy",
    "bm_partition_exact",
    "bm_joint_index",
    "bm_state_from_index",
    "bm_hidden_activation",
    "bm_visible_activation",
    "bm_gibbs_sample",
    "GibbsSampleRun",
    "bm_free_energy",
    "bm_log_likelihood",
    "bm_exact_gradient",
    "BMGradient",
    "bm_train",
    "TrainResult",
    "load_visible_data",
    "dump_visible_data",
]


def _energy_table(energies) -> np.ndarray:
    arr = np.asarray(energies, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise ValidationError("energy table must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("energy table entries must be finite")
    return arr


def _logistic(z):
    return np.exp(-np.logaddexp(0.0, -np.asarray(z, dtype=float)))


def _logsumexp(values: np.ndarray) -> float:
    m = float(values.max())
    return m + math.log(float(np.exp(values - m).sum()))


def ebl_infer(energies) -> int:
    """Index of the minimum-energy label; ties go to the lowest index."""
    table = _energy_table(energies)
    return int(np.argmin(table))


class GibbsPosterior(NamedTuple):
    posterior: DiscreteDistribution
    z: float


def gibbs_posterior(energies, beta: float) -> GibbsPosterior:
    """Exponentiate-and-normalize over labels, with the partition value.

    P(y) = exp(-beta E_y) / Z, computed with a max shift. beta = 0 gives
    the uniform distribution.
    """
    table = _energy_table(energies)
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValidationError(f"gibbs_posterior: beta must be finite and >= 0, got {beta!r}")
    scaled = -beta * table
    m = scaled.max()
    weights = np.exp(scaled - m)
    total = weights.sum()
    z = float(math.exp(m) * total)
    return GibbsPosterior(DiscreteDistribution(weights / total), z)


def _check_label(table: np.ndarray, correct: int) -> int:
    correct = int(correct)
    if not 0 <= correct < table.size:
        raise ValidationError(f"label index {correct} out of range for {table.size} labels")
    return correct


def loss_perceptron(energies, correct: int) -> float:
    """Energy gap between the correct label and the best label; zero iff
    the correct label attains the minimum."""
    table = _energy_table(energies)
    correct = _check_label(table, correct)
    return float(table[correct] - table.min())


def loss_hinge(e_correct: float, e_incorrect: float, margin: float) -> float:
    """max(0, margin + E_correct - E_incorrect)."""
    if not (margin >= 0 and math.isfinite(margin)):
        raise ValidationError(f"loss_hinge: margin must be finite and >= 0, got {margin!r}")
    if not (math.isfinite(e_correct) and math.isfinite(e_incorrect)):
        raise ValidationError("loss_hinge: energies must be finite")
    return max(0.0, margin + e_correct - e_incorrect)


def loss_nll(energies, correct: int, beta: float) -> float:
    """E_correct + (1/beta) log sum_y exp(-beta E_y).

    Equals -(1/beta) log of the Gibbs posterior at the correct label;
    the log-sum-exp is max-shifted.
    """
    table = _energy_table(energies)
    correct = _check_label(table, correct)
    if not (beta > 0 and math.isfinite(beta)):
        raise ValidationError(f"loss_nll: beta must be finite and > 0, got {beta!r}")
    scaled = -beta * table
    return float(table[correct] + _logsumexp(scaled) / beta)


@dataclass(frozen=True)
class BoltzmannMachine:
    """Bipartite binary energy model: visible biases a, hidden biases b,
    cross-layer weights W (n_v by n_h). No intra-layer connections."""

    a: np.ndarray
    b: np.ndarray
    W: np.ndarray

    def __post_init__(self):
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        if a.ndim != 1 or b.ndim != 1:
            raise ValidationError("BoltzmannMachine: biases must be vectors")
        if W.shape != (a.size, b.size):
            raise ValidationError(
                f"BoltzmannMachine: W shape {W.shape} does not match ({a.size}, {b.size})"
            )
        for name, arr in (("a", a), ("b", b), ("W", W)):
            if not np.all(np.isfinite(arr)):
                raise ValidationError(f"BoltzmannMachine: {name} must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "W", W)

    @property
    def n_visible(self) -> int:
        return self.a.size

    @property
    def n_hidden(self) -> int:
        return self.b.size

    @classmethod
    def zeros(cls, n_visible: int, n_hidden: int) -> "BoltzmannMachine":
        return cls(np.zeros(n_visible), np.zeros(n_hidden), np.zeros((n_visible, n_hidden)))

    def to_json(self) -> str:
        return json.dumps(
            {"a": self.a.tolist(), "b": self.b.tolist(), "W": self.W.tolist()},
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "BoltzmannMachine":
        payload = json.loads(text)
        missing = {"a", "b", "W"} - set(payload)
        if missing:
            raise ValidationError(f"machine JSON missing keys: {sorted(missing)}")
        return cls(np.asarray(payload["a"]), np.asarray(payload["b"]), np.asarray(payload["W"]))


class BMState(NamedTuple):
    v: np.ndarray
    h: np.ndarray


def _check_binary(vec, length: int, name: str) -> np.ndarray:
    arr = np.asarray(vec)
    if arr.shape != (length,):
        raise ValidationError(f"{name} must have shape ({length},), got {arr.shape}")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError(f"{name} entries must be 0 or 1")
    return arr.astype(np.uint8)


def bm_energy(state: BMState, machine: BoltzmannMachine) -> float:
    """E(v,h) = -a.v - b.h - v W h."""
    v = _check_binary(state.v, machine.n_visible, "v")
    h = _check_binary(state.h, machine.n_hidden, "h")
    vf = v.astype(float)
    hf = h.astype(float)
    return float(-machine.a @ vf - machine.b @ hf - vf @ machine.W @ hf)


def bm_joint_index(state: BMState, machine: BoltzmannMachine) -> int:
    """Flat state index: visible bits low (bit i = v_i), hidden bits above."""
    v = _check_binary(state.v, machine.n_visible, "v")
    h = _check_binary(state.h, machine.n_hidden, "h")
    idx = 0
    for i, bit in enumerate(v):
        idx |= int(bit) << i
    for j, bit in enumerate(h):
        idx |= int(bit) << (machine.n_visible + j)
    return idx


def bm_state_from_index(index: int, machine: BoltzmannMachine) -> BMState:
    v = np.array([(index >> i) & 1 for i in range(machine.n_visible)], dtype=np.uint8)
    h = np.array(
        [(index >> (machine.n_visible + j)) & 1 for j in range(machine.n_hidden)],
        dtype=np.uint8,
    )
    return BMState(v, h)


def _all_bit_columns(n_states: int, n_bits: int, offset: int) -> np.ndarray:
    idx = np.arange(n_states, dtype=np.int64)
    return np.stack([((idx >> (offset + k)) & 1) for k in range(n_bits)], axis=1).astype(float)


def bm_partition_exact(machine: BoltzmannMachine):
    """Z and the joint distribution over all 2^(n_v+n_h) states.

    States are indexed per :func:`bm_joint_index`. Guarded at
    ``MAX_EXACT_UNITS`` total units.
    """
    n_units = machine.n_visible + machine.n_hidden
    if n_units > MAX_EXACT_UNITS:
        raise CapacityError(f"exact enumeration limited to {MAX_EXACT_UNITS} units, got {n_units}")
    n_states = 1 << n_units
    V = _all_bit_columns(n_states, machine.n_visible, 0)
    H = _all_bit_columns(n_states, machine.n_hidden, machine.n_visible)
    energies = -(V @ machine.a) - (H @ machine.b) - np.einsum("si,ij,sj->s", V, machine.W, H)
    neg = -energies
    m = neg.max()
    weights = np.exp(neg - m)
    total = weights.sum()
    z = float(math.exp(m) * total)
    return z, DiscreteDistribution(weights / total)


def bm_hidden_activation(machine: BoltzmannMachine, v) -> np.ndarray:
    """p(h_j = 1 | v) = logistic(b_j + sum_i v_i w_ij)."""
    vf = np.asarray(v, dtype=float)
    return _logistic(machine.b + vf @ machine.W)


def bm_visible_activation(machine: BoltzmannMachine, h) -> np.ndarray:
    """p(v_i = 1 | h) = logistic(a_i + sum_j w_ij h_j)."""
    hf = np.asarray(h, dtype=float)
    return _logistic(machine.a + machine.W @ hf)


class GibbsSampleRun(Sequence):
    """Recorded block-Gibbs trajectory.

    Behaves as a sequence of :class:`BMState` while storing the visible
    and hidden trajectories as compact (steps, n) uint8 arrays, available
    directly as ``.visible`` and ``.hidden``.
    """

    def __init__(self, visible: np.ndarray, hidden: np.ndarray):
        if visible.shape[0] != hidden.shape[0]:
            raise ValidationError("visible and hidden trajectories must have equal length")
        self.visible = visible
        self.hidden = hidden

    def __len__(self) -> int:
        return self.visible.shape[0]

    def __getitem__(self, item):
        if isinstance(item, slice):
            return GibbsSampleRun(self.visible[item], self.hidden[item])
        return BMState(self.visible[item], self.hidden[item])


def bm_gibbs_sample(
    machine: BoltzmannMachine, steps: int, rng: RngStream, start: BMState = None
) -> GibbsSampleRun:
    """Alternating block updates: resample all hidden units given v, then
    all visible units given the new h; one recorded state per full step.

    The stationary distribution is the machine's exact joint. ``start``
    defaults to all zeros.
    """
    if steps < 1:
        raise ValidationError(f"bm_gibbs_sample: steps must be >= 1, got {steps}")
    n_v, n_h = machine.n_visible, machine.n_hidden
    if start is None:
        v = np.zeros(n_v, dtype=np.uint8)
    else:
        v = _check_binary(start.v, n_v, "start.v")
        _check_binary(start.h, n_h, "start.h")
    gen = rng.generator
    visible = np.empty((steps, n_v), dtype=np.uint8)
    hidden = np.empty((steps, n_h), dtype=np.uint8)
    u_h = gen.random((steps, n_h))
    u_v = gen.random((steps, n_v))
    vf = v.astype(float)
    for t in range(steps):
        p_h = _logistic(machine.b + vf @ machine.W)
        h = (u_h[t] < p_h).astype(np.uint8)
        p_v = _logistic(machine.a + machine.W @ h.astype(float))
        v = (u_v[t] < p_v).astype(np.uint8)
        vf = v.astype(float)
        visible[t] = v
        hidden[t] = h
    return GibbsSampleRun(visible, hidden)


def bm_free_energy(machine: BoltzmannMachine, v) -> float:
    """F(v) = -a.v - sum_j softplus(b_j + (vW)_j); p(v) = exp(-F(v))/Z."""
    vf = np.asarray(v, dtype=float)
    return float(-machine.a @ vf - np.logaddexp(0.0, machine.b + vf @ machine.W).sum())


def _log_z_visible(machine: BoltzmannMachine) -> float:
    # lnZ by marginalizing the hidden layer analytically, then summing
    # the 2^{n_v} visible free energies with a max shift
    n_units = machine.n_visible + machine.n_hidden
    if n_units > MAX_EXACT_UNITS:
        raise CapacityError(f"exact likelihood limited to {MAX_EXACT_UNITS} units, got {n_units}")
    V = _all_bit_columns(1 << machine.n_visible, machine.n_visible, 0)
    free = -(V @ machine.a) - np.logaddexp(0.0, machine.b + V @ machine.W).sum(axis=1)
    return _logsumexp(-free)


def bm_log_likelihood(machine: BoltzmannMachine, data) -> float:
    """Mean log p(v) over the data rows, by exact enumeration."""
    arr = _visible_matrix(data, machine.n_visible)
    log_z = _log_z_visible(machine)
    frees = np.array([bm_free_energy(machine, row) for row in arr])
    return float((-frees - log_z).mean())


def _visible_matrix(data, n_visible: int) -> np.ndarray:
    arr = np.asarray(data)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] != n_visible:
        raise ValidationError(f"data must be (m, {n_visible}) binary rows")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValidationError("data entries must be 0 or 1")
    return arr.astype(float)


def _exact_model_stats(machine: BoltzmannMachine, V_all, H_all):
    _, joint = bm_partition_exact(machine)
    p = joint.probs
    return p @ V_all, p @ H_all, (V_all * p[:, None]).T @ H_all


class BMGradient(NamedTuple):
    a: np.ndarray
    b: np.ndarray
    W: np.ndarray


def bm_exact_gradient(machine: BoltzmannMachine, data) -> BMGradient:
    """Gradient of the mean log-likelihood in (a, b, W), by enumeration.

    Ascent direction: data statistics minus model statistics, with the
    hidden data statistics taken from the analytic activations p(h|v).
    Capacity-guarded like every other enumeration routine here.
    """
    X = _visible_matrix(data, machine.n_visible)
    n_units = machine.n_visible + machine.n_hidden
    if n_units > MAX_EXACT_UNITS:
        raise CapacityError(f"exact gradient limited to {MAX_EXACT_UNITS} units, got {n_units}")
    n_states = 1 << n_units
    V_all = _all_bit_columns(n_states, machine.n_visible, 0)
    H_all = _all_bit_columns(n_states, machine.n_hidden, machine.n_visible)
    P_h = _logistic(machine.b + X @ machine.W)
    model_v, model_h, model_vh = _exact_model_stats(machine, V_all, H_all)
    return BMGradient(
        X.mean(axis=0) - model_v,
        P_h.mean(axis=0) - model_h,
        X.T @ P_h / X.shape[0] - model_vh,
    )


class TrainResult(NamedTuple):
    machine: BoltzmannMachine
    loss_curve: List[float]


def bm_train(
    machine: BoltzmannMachine,
    data,
    method: str = "exact_gradient",
    learning_rate: float = 0.1,
    epochs: int = 100,
    k: int = 1,
    rng: RngStream = None,
) -> TrainResult:
    """Maximum-likelihood training by full-batch gradient ascent.

    ``exact_gradient`` computes the model expectations by enumeration
    (capacity-guarded); ``cd_k`` approximates them with k block-Gibbs
    steps started from each data row. The hidden data statistics use the
    analytic activations p(h|v) in both modes. The loss curve holds the
    mean negative log-likelihood after each epoch (computed exactly;
    requires enumeration capacity, so cd_k on large machines reports an
    empty curve).
    """
    if method not in ("exact_gradient", "cd_k"):
        raise ValidationError(f"bm_train: unknown method {method!r}")
    if epochs < 0:
        raise ValidationError("bm_train: epochs must be >= 0")
    if method == "cd_k":
        if k < 1:
            raise ValidationError("bm_train: cd_k requires k >= 1")
        if rng is None:
            raise ValidationError("bm_train: cd_k requires an rng")
    X = _visible_matrix(data, machine.n_visible)
    m = X.shape[0]
    a = machine.a.copy()
    b = machine.b.copy()
    W = machine.W.copy()
    n_units = machine.n_visible + machine.n_hidden
    can_score = n_units <= MAX_EXACT_UNITS
    if method == "exact_gradient" and not can_score:
        raise CapacityError(f"exact_gradient limited to {MAX_EXACT_UNITS} units, got {n_units}")

    n_states = 1 << n_units
    V_all = _all_bit_columns(n_states, machine.n_visible, 0) if can_score else None
    H_all = _all_bit_columns(n_states, machine.n_hidden, machine.n_visible) if can_score else None

    losses: List[float] = []
    gen = rng.generator if rng is not None else None
    for _ in range(epochs):
        current = BoltzmannMachine(a, b, W)
        P_h = _logistic(b + X @ W)
        data_v = X.mean(axis=0)
        data_h = P_h.mean(axis=0)
        data_vh = X.T @ P_h / m

        if method == "exact_gradient":
            model_v, model_h, model_vh = _exact_model_stats(current, V_all, H_all)
        else:
            v_neg = X.copy()
            for _ in range(k):
                p_h = _logistic(b + v_neg @ W)
                h_neg = (gen.random(p_h.shape) < p_h).astype(float)
                p_v = _logistic(a + h_neg @ W.T)
                v_neg = (gen.random(p_v.shape) < p_v).astype(float)
            p_h_neg = _logistic(b + v_neg @ W)
            model_v = v_neg.mean(axis=0)
            model_h = p_h_neg.mean(axis=0)
            model_vh = v_neg.T @ p_h_neg / m

        a = a + learning_rate * (data_v - model_v)
        b = b + learning_rate * (data_h - model_h)
        W = W + learning_rate * (data_vh - model_vh)
        if can_score:
            losses.append(-bm_log_likelihood(BoltzmannMachine(a, b, W), X))
    return TrainResult(BoltzmannMachine(a, b, W), losses)


def load_visible_data(path) -> np.ndarray:
    """Read binary rows, one string of 0/1 characters per line."""
    rows = []
    with open(path) as fh:
        for line_no, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            if set(text) - {"0", "1"}:
                raise ValidationError(f"{path}:{line_no}: expected only 0/1 characters, got {text!r}")
            rows.append([int(ch) for ch in text])
    if not rows:
        raise ValidationError(f"{path}: no data rows")
    widths = {len(r) for r in rows}
    if len(widths) > 1:
        raise ValidationError(f"{path}: inconsistent row widths {sorted(widths)}")
    return np.array(rows, dtype=np.uint8)


def dump_visible_data(data, path) -> None:
    arr = np.asarray(data)
    with open(path, "w") as fh:
        for row in arr:
            fh.write("".join(str(int(x)) for x in row) + "\n")
