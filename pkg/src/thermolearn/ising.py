"""Ising model: energies, exact small-system thermodynamics, Metropolis sampling.

Spins live in {-1, +1}. The Hamiltonian is

    E(s) = - sum_{(i,j) in edges} J_ij s_i s_j  -  sum_i h_i s_i

with every undirected pair counted once. Exact enumeration is guarded at
``MAX_EXACT_SITES`` sites; the sampler has no size limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from .distributions import DiscreteDistribution
from .errors import CapacityError, ValidationError
from .rng import RngStream
from .trace import Trace

MAX_EXACT_SITES = 20

__all__ = [
    "CouplingGraph",
    "chain_graph",
    "complete_graph",
    "load_coupling_graph",
    "dump_coupling_graph",
    "check_spins",
    "random_spins",
    "config_index",
    "config_from_index",
    "ising_energy",
    "enumerate_energies",
    "partition_exact",
    "PartitionResult",
    "boltzmann_entropy",
    "acceptance_probability",
    "metropolis_step",
    "StepResult",
    "metropolis_chain",
    "ChainResult",
    "estimate_observables",
    "Observables",
]


@dataclass(frozen=True)
class CouplingGraph:
    """Interaction structure: pair couplings J_ij and site fields h_i."""

    n_sites: int
    edges: Tuple[Tuple[int, int, float], ...] = ()
    fields_h: np.ndarray = None

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValidationError("CouplingGraph: n_sites must be >= 1")
        seen = set()
        normalized = []
        for i, j, coupling in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise ValidationError(f"CouplingGraph: self-loop at site {i}")
            if i > j:
                i, j = j, i
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ValidationError(f"CouplingGraph: edge ({i},{j}) out of range for {self.n_sites} sites")
            if (i, j) in seen:
                raise ValidationError(f"CouplingGraph: duplicate edge ({i},{j})")
            seen.add((i, j))
            normalized.append((i, j, float(coupling)))
        object.__setattr__(self, "edges", tuple(normalized))
        h = np.zeros(self.n_sites) if self.fields_h is None else np.asarray(self.fields_h, dtype=float)
        if h.shape != (self.n_sites,):
            raise ValidationError("CouplingGraph: fields_h must have one entry per site")
        if not np.all(np.isfinite(h)):
            raise ValidationError("CouplingGraph: fields must be finite")
        object.__setattr__(self, "fields_h", h)

    def adjacency(self) -> List[List[Tuple[int, float]]]:
        """Neighbor list per site as (site, coupling) pairs."""
        adj = [[] for _ in range(self.n_sites)]
        for i, j, coupling in self.edges:
            adj[i].append((j, coupling))
            adj[j].append((i, coupling))
        return adj


def chain_graph(n_sites: int, coupling: float = 1.0, h: float = 0.0, periodic: bool = False) -> CouplingGraph:
    """1-D chain of n sites with uniform coupling and field."""
    edges = [(i, i + 1, coupling) for i in range(n_sites - 1)]
    if periodic and n_sites > 2:
        edges.append((0, n_sites - 1, coupling))
    return CouplingGraph(n_sites, tuple(edges), np.full(n_sites, float(h)))


def complete_graph(n_sites: int, coupling: float = 1.0, h: float = 0.0) -> CouplingGraph:
    """All-to-all couplings of equal strength."""
    edges = [(i, j, coupling) for i in range(n_sites) for j in range(i + 1, n_sites)]
    return CouplingGraph(n_sites, tuple(edges), np.full(n_sites, float(h)))


def load_coupling_graph(path) -> CouplingGraph:
    """Read the edge-list text format.

    First non-comment line: number of sites. Then one line per coupling
    "i j J" and one line per field "h i value". Blank lines and lines
    starting with '#' are ignored.
    """
    with open(path) as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ValidationError(f"{path}: empty graph file")
    try:
        n_sites = int(lines[0])
    except ValueError:
        raise ValidationError(f"{path}: first line must be the site count, got {lines[0]!r}") from None
    edges = []
    h = np.zeros(n_sites)
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "h":
            if len(parts) != 3:
                raise ValidationError(f"{path}: field line must be 'h i value', got {ln!r}")
            h[int(parts[1])] = float(parts[2])
        else:
            if len(parts) != 3:
                raise ValidationError(f"{path}: edge line must be 'i j J', got {ln!r}")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    return CouplingGraph(n_sites, tuple(edges), h)


def dump_coupling_graph(graph: CouplingGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{graph.n_sites}\n")
        for i, j, coupling in graph.edges:
            fh.write(f"{i} {j} {float(coupling)!r}\n")
        for i, hi in enumerate(graph.fields_h):
            if hi != 0.0:
                fh.write(f"h {i} {float(hi)!r}\n")


def check_spins(spins, n_sites: int) -> np.ndarray:
    """Validate a spin configuration: entries in {-1,+1}, matching length."""
    arr = np.asarray(spins)
    if arr.shape != (n_sites,):
        raise ValidationError(f"spin config has shape {arr.shape}, expected ({n_sites},)")
    if not np.all(np.abs(arr) == 1):
        raise ValidationError("spins must be -1 or +1")
    return arr.astype(np.int8)


def random_spins(n_sites: int, rng: RngStream) -> np.ndarray:
    return (rng.generator.integers(0, 2, n_sites) * 2 - 1).astype(np.int8)


def config_index(spins) -> int:
    """Pack a configuration into an integer: bit i set iff spin i is +1."""
    idx = 0
    for i, s in enumerate(spins):
        if s > 0:
            idx |= 1 << i
    return idx


def config_from_index(index: int, n_sites: int) -> np.ndarray:
    return np.array([1 if (index >> i) & 1 else -1 for i in range(n_sites)], dtype=np.int8)


def ising_energy(spins, graph: CouplingGraph) -> float:
    """Total energy of a configuration under the graph's Hamiltonian."""
    s = check_spins(spins, graph.n_sites)
    energy = -float(graph.fields_h @ s)
    for i, j, coupling in graph.edges:
        energy -= coupling * float(s[i] * s[j])
    return energy


def enumerate_energies(graph: CouplingGraph) -> np.ndarray:
    """Energies of all 2^N configurations, indexed by ``config_index``."""
    n = graph.n_sites
    if n > MAX_EXACT_SITES:
        raise CapacityError(f"exact enumeration limited to {MAX_EXACT_SITES} sites, got {n}")
    idx = np.arange(1 << n, dtype=np.int64)
    spin_of = [(((idx >> i) & 1) * 2 - 1).astype(np.int8) for i in range(n)]
    energies = np.zeros(idx.size)
    for i, j, coupling in graph.edges:
        energies -= coupling * (spin_of[i] * spin_of[j])
    for i in range(n):
        hi = graph.fields_h[i]
        if hi != 0.0:
            energies -= hi * spin_of[i]
    return energies


class PartitionResult(NamedTuple):
    z: float
    gibbs: DiscreteDistribution


def partition_exact(graph: CouplingGraph, beta: float) -> PartitionResult:
    """Exact partition function and Gibbs distribution over all 2^N configs.

    Z = sum_s exp(-beta E(s)); probabilities are computed with a max
    shift so low temperatures stay finite.
    """
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValidationError(f"partition_exact: beta must be finite and >= 0, got {beta!r}")
    energies = enumerate_energies(graph)
    e_min = energies.min()
    weights = np.exp(-beta * (energies - e_min))
    total = weights.sum()
    z = float(math.exp(-beta * e_min) * total)
    return PartitionResult(z, DiscreteDistribution(weights / total))


def boltzmann_entropy(multiplicity: int, k_B: float = 1.0) -> float:
    """S = k_B ln(Omega) for a macro-state with the given multiplicity."""
    if multiplicity < 1:
        raise ValidationError(f"boltzmann_entropy: multiplicity must be >= 1, got {multiplicity!r}")
    if not k_B > 0:
        raise ValidationError("boltzmann_entropy: k_B must be positive")
    return k_B * math.log(multiplicity)


def acceptance_probability(delta_h: float, beta: float) -> float:
    """Metropolis acceptance: 1 if the move is downhill, else exp(-beta dH)."""
    if delta_h <= 0:
        return 1.0
    return math.exp(-beta * delta_h)


def _local_field(spins, adjacency, fields, site: int) -> float:
    local = fields[site]
    for j, coupling in adjacency[site]:
        local += coupling * spins[j]
    return local


class StepResult(NamedTuple):
    spins: np.ndarray
    accepted: bool
    delta_h: float


def metropolis_step(spins, graph: CouplingGraph, beta: float, rng: RngStream) -> StepResult:
    """One Metropolis update with a uniform single-spin-flip proposal.

    Flipping site i costs dH = 2 s_i (sum_j J_ij s_j + h_i). Downhill or
    flat moves are always taken; uphill moves are taken iff a uniform
    r in [0, 1) satisfies r < exp(-beta dH). At beta = 0 that check
    accepts with probability exactly 1. On rejection the input array is
    returned unchanged; on acceptance a flipped copy is returned.
    """
    s = check_spins(spins, graph.n_sites)
    site = int(rng.generator.integers(graph.n_sites))
    adjacency = graph.adjacency()
    delta_h = 2.0 * float(s[site]) * _local_field(s, adjacency, graph.fields_h, site)
    if delta_h <= 0:
        accepted = True
    else:
        accepted = rng.generator.random() < math.exp(-beta * delta_h)
    if accepted:
        out = s.copy()
        out[site] = -out[site]
        return StepResult(out, True, delta_h)
    return StepResult(s, False, delta_h)


@dataclass
class ChainResult:
    """Post-burn-in samples (one config per row) plus the per-step trace."""

    samples: np.ndarray
    trace: Trace

    @property
    def acceptance_rate(self) -> float:
        return float(self.trace.column("accepted").mean())


def metropolis_chain(
    graph: CouplingGraph,
    beta: float,
    steps: int,
    burn_in: Optional[int] = None,
    rng: RngStream = None,
    initial=None,
    validate_energy: bool = False,
) -> ChainResult:
    """Run a single-flip Metropolis chain and record every step.

    ``burn_in`` defaults to steps // 10; samples are the states after
    every post-burn-in step. For speed the site indices and acceptance
    uniforms are drawn up front (one of each per step, in that order,
    after the initial state when it is random); the accept rule per step
    is identical to :func:`metropolis_step`. With ``validate_energy`` the
    incremental energy is checked against a full recomputation at every
    accepted step.
    """
    if rng is None:
        raise ValidationError("metropolis_chain: rng is required for reproducibility")
    if burn_in is None:
        burn_in = steps // 10
    if not steps > burn_in >= 0:
        raise ValidationError(f"metropolis_chain: need steps > burn_in >= 0, got {steps}, {burn_in}")
    if not (beta >= 0 and math.isfinite(beta)):
        raise ValidationError(f"metropolis_chain: beta must be finite and >= 0, got {beta!r}")
    n = graph.n_sites
    if initial is None:
        spins_arr = random_spins(n, rng)
    else:
        spins_arr = check_spins(initial, n)
    spins = [int(s) for s in spins_arr]

    adjacency = graph.adjacency()
    fields = [float(h) for h in graph.fields_h]
    energy = ising_energy(spins_arr, graph)
    mag_sum = float(sum(spins))
    inv_n = 1.0 / n

    sites = rng.generator.integers(0, n, size=steps).tolist()
    uniforms = rng.generator.random(steps).tolist()

    energies = np.empty(steps)
    accepted_col = np.empty(steps, dtype=bool)
    mags = np.empty(steps)
    samples = np.empty((steps - burn_in, n), dtype=np.int8)

    exp = math.exp
    for t in range(steps):
        site = sites[t]
        s = spins[site]
        local = fields[site]
        for j, coupling in adjacency[site]:
            local += coupling * spins[j]
        delta_h = 2.0 * s * local
        accepted = delta_h <= 0.0 or uniforms[t] < exp(-beta * delta_h)
        if accepted:
            spins[site] = -s
            energy += delta_h
            mag_sum -= 2.0 * s
            if validate_energy:
                fresh = ising_energy(np.array(spins, dtype=np.int8), graph)
                if abs(fresh - energy) > 1e-9:
                    raise AssertionError(f"incremental energy drifted: {energy} vs {fresh}")
        energies[t] = energy
        accepted_col[t] = accepted
        mags[t] = mag_sum * inv_n
        if t >= burn_in:
            samples[t - burn_in] = spins

    trace = Trace(
        {
            "step": np.arange(steps),
            "energy": energies,
            "accepted": accepted_col,
            "magnetization": mags,
        }
    )
    return ChainResult(samples, trace)


@dataclass(frozen=True)
class Observables:
    mean_energy: float
    mean_magnetization: float
    se_energy: float
    se_magnetization: float
    n_samples: int


def estimate_observables(samples, graph: CouplingGraph, n_batches: Optional[int] = None) -> Observables:
    """Mean energy and magnetization with batch-means standard errors.

    ``samples`` is an (m, n_sites) array of configurations. With fewer
    than two batches the standard errors degenerate to zero.
    """
    arr = np.asarray(samples)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValidationError("estimate_observables: need a non-empty (m, n_sites) sample array")
    if arr.shape[1] != graph.n_sites:
        raise ValidationError("estimate_observables: sample width must match graph.n_sites")
    m = arr.shape[0]
    s = arr.astype(np.float64)
    energies = np.zeros(m)
    for i, j, coupling in graph.edges:
        energies -= coupling * s[:, i] * s[:, j]
    energies -= s @ graph.fields_h
    mags = s.mean(axis=1)

    if n_batches is None:
        n_batches = max(1, min(100, int(math.sqrt(m))))
    per = m // n_batches

    def batch_se(series):
        if n_batches < 2 or per == 0:
            return 0.0
        means = series[: n_batches * per].reshape(n_batches, per).mean(axis=1)
        return float(means.std(ddof=1) / math.sqrt(n_batches))

    return Observables(
        mean_energy=float(energies.mean()),
        mean_magnetization=float(mags.mean()),
        se_energy=batch_se(energies),
        se_magnetization=batch_se(mags),
        n_samples=m,
    )
