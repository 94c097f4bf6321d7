"""Simulated annealing over pluggable energy landscapes.

A landscape supplies three things: an energy, a proposal move, and a way
to draw a fresh random state. The annealer runs Metropolis acceptance at
a per-sweep temperature from a cooling schedule and reports the best
state ever visited, not the final one, since the walk may drift uphill
after touching the optimum.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ValidationError
from .rng import RngStream
from .trace import Trace

SCHEDULE_KINDS = ("geometric", "linear", "logarithmic", "constant")

__all__ = [
    "EnergyLandscape",
    "CoolingSchedule",
    "schedule_temperature",
    "anneal",
    "AnnealResult",
]


class EnergyLandscape(ABC):
    """State space with an energy to minimize.

    Implementations must be reentrant: no hidden mutable state, so
    parallel restarts over independent rng streams stay independent.
    """

    @abstractmethod
    def energy(self, state) -> float: ...

    @abstractmethod
    def propose(self, state, rng: RngStream): ...

    @abstractmethod
    def random_state(self, rng: RngStream): ...


@dataclass(frozen=True)
class CoolingSchedule:
    """Temperature as a function of the sweep index k >= 0.

    kinds: geometric T0*r^k (parameter r in (0,1]); linear
    max(T0 - p*k, floor) (parameter p >= 0, floor > 0); logarithmic
    T0/ln(k+2); constant T0. All keep T positive and non-increasing.
    """

    kind: str
    t0: float
    parameter: float = 0.0
    floor: float = 1e-9

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ValidationError(f"CoolingSchedule: kind must be one of {SCHEDULE_KINDS}, got {self.kind!r}")
        if not (self.t0 > 0 and math.isfinite(self.t0)):
            raise ValidationError(f"CoolingSchedule: T0 must be finite and > 0, got {self.t0!r}")
        if self.kind == "geometric" and not (0 < self.parameter <= 1):
            raise ValidationError(f"CoolingSchedule: geometric ratio must be in (0, 1], got {self.parameter!r}")
        if self.kind == "linear":
            if self.parameter < 0:
                raise ValidationError("CoolingSchedule: linear decrement must be >= 0")
            if not (0 < self.floor <= self.t0):
                raise ValidationError("CoolingSchedule: linear floor must satisfy 0 < floor <= T0")

    def temperature(self, k: int) -> float:
        return schedule_temperature(self, k)


def schedule_temperature(schedule: CoolingSchedule, k: int) -> float:
    """Temperature at sweep k under the schedule; always > 0."""
    if k < 0:
        raise ValidationError(f"schedule_temperature: k must be >= 0, got {k}")
    if schedule.kind == "geometric":
        return schedule.t0 * schedule.parameter**k
    if schedule.kind == "linear":
        return max(schedule.t0 - schedule.parameter * k, schedule.floor)
    if schedule.kind == "logarithmic":
        return schedule.t0 / math.log(k + 2)
    return schedule.t0


class AnnealResult(NamedTuple):
    best_state: object
    best_energy: float
    trace: Trace


def anneal(
    problem: EnergyLandscape,
    schedule: CoolingSchedule,
    sweeps: int,
    proposals_per_sweep: int,
    rng: RngStream,
    initial=None,
) -> AnnealResult:
    """Metropolis walk under a cooling schedule; returns the best-ever state.

    Sweep k runs ``proposals_per_sweep`` proposals at T(k): downhill or
    flat moves are accepted, uphill moves with probability
    exp(-dH / T(k)) against a uniform draw in [0, 1). The trace records
    one row per sweep: temperature, end-of-sweep current energy, best
    energy so far, and the sweep's acceptance rate.
    """
    if sweeps < 1:
        raise ValidationError(f"anneal: sweeps must be >= 1, got {sweeps}")
    if proposals_per_sweep < 1:
        raise ValidationError(f"anneal: proposals_per_sweep must be >= 1, got {proposals_per_sweep}")
    state = problem.random_state(rng) if initial is None else initial
    energy = float(problem.energy(state))
    if not math.isfinite(energy):
        raise ValidationError("anneal: initial energy is not finite")
    best_state, best_energy = state, energy

    temps = np.empty(sweeps)
    currents = np.empty(sweeps)
    bests = np.empty(sweeps)
    acc_rates = np.empty(sweeps)
    exp = math.exp

    for k in range(sweeps):
        temperature = schedule_temperature(schedule, k)
        if not (temperature > 0 and math.isfinite(temperature)):
            raise ValidationError(f"anneal: schedule produced T={temperature!r} at sweep {k}")
        inv_t = 1.0 / temperature
        accepted = 0
        for _ in range(proposals_per_sweep):
            candidate = problem.propose(state, rng)
            candidate_energy = float(problem.energy(candidate))
            delta = candidate_energy - energy
            if delta <= 0.0 or rng.random() < exp(-delta * inv_t):
                state = candidate
                energy = candidate_energy
                accepted += 1
                if energy < best_energy:
                    best_state, best_energy = state, energy
        temps[k] = temperature
        currents[k] = energy
        bests[k] = best_energy
        acc_rates[k] = accepted / proposals_per_sweep

    trace = Trace(
        {
            "sweep": np.arange(sweeps),
            "temperature": temps,
            "current_energy": currents,
            "best_energy": bests,
            "acceptance_rate": acc_rates,
        }
    )
    return AnnealResult(best_state, float(best_energy), trace)
