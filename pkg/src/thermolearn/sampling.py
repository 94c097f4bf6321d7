"""Importance sampling and empirical central-limit checks."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ValidationError
from .rng import RngStream

__all__ = [
    "WeightedSample",
    "importance_estimate",
    "Bernoulli",
    "UniformReal",
    "Exponential",
    "clt_standardized_sums",
]


@dataclass(frozen=True)
class WeightedSample:
    """A draw from the proposal together with its importance ratio p(x)/q(x)."""

    value: float
    weight: float

    def __post_init__(self):
        if not (self.weight >= 0 and math.isfinite(self.weight)):
            raise ValidationError(f"WeightedSample: weight must be finite and >= 0, got {self.weight!r}")


def importance_estimate(h_values, p_densities, q_densities) -> float:
    """Estimate E_p[h(x)] from samples drawn under the proposal q.

    Returns (1/N) sum h(x_i) p(x_i)/q(x_i). All q densities must be
    strictly positive; when p and q coincide this reduces bit-exactly to
    the plain Monte Carlo mean of h.
    """
    h = np.asarray(h_values, dtype=float)
    p = np.asarray(p_densities, dtype=float)
    q = np.asarray(q_densities, dtype=float)
    if not (h.shape == p.shape == q.shape) or h.ndim != 1 or h.size == 0:
        raise ValidationError("importance_estimate: h, p, q must be equal-length non-empty vectors")
    if np.any(q <= 0):
        raise DomainError("importance_estimate: proposal density must be strictly positive at every sample")
    if np.any(p < 0):
        raise DomainError("importance_estimate: target density must be non-negative")
    return float(np.mean(h * (p / q)))


@dataclass(frozen=True)
class Bernoulli:
    """Two-point sampler on {0, 1}."""

    p: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValidationError(f"Bernoulli: p must lie in [0, 1], got {self.p!r}")

    @property
    def mean(self):
        return self.p

    @property
    def variance(self):
        return self.p * (1.0 - self.p)

    def sample(self, rng: RngStream, size):
        return (rng.generator.random(size) < self.p).astype(float)


@dataclass(frozen=True)
class UniformReal:
    """Uniform sampler on [low, high)."""

    low: float = 0.0
    high: float = 1.0

    def __post_init__(self):
        if not self.high > self.low:
            raise ValidationError("UniformReal: need high > low")

    @property
    def mean(self):
        return 0.5 * (self.low + self.high)

    @property
    def variance(self):
        return (self.high - self.low) ** 2 / 12.0

    def sample(self, rng: RngStream, size):
        return rng.generator.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class Exponential:
    """Exponential sampler with the given rate."""

    rate: float = 1.0

    def __post_init__(self):
        if not self.rate > 0:
            raise ValidationError("Exponential: rate must be positive")

    @property
    def mean(self):
        return 1.0 / self.rate

    @property
    def variance(self):
        return 1.0 / self.rate**2

    def sample(self, rng: RngStream, size):
        return rng.generator.exponential(1.0 / self.rate, size)


def clt_standardized_sums(sampler, n: int, reps: int, rng: RngStream) -> np.ndarray:
    """Draw ``reps`` standardized sums (S_n - n mu) / (sigma sqrt(n)).

    As ``reps`` grows the empirical mean tends to 0 and the variance to 1;
    as ``n`` grows the whole empirical law approaches a standard normal.
    """
    if n < 1 or reps < 1:
        raise ValidationError("clt_standardized_sums: n and reps must be >= 1")
    mu = float(sampler.mean)
    var = float(sampler.variance)
    if not (var > 0 and math.isfinite(var) and math.isfinite(mu)):
        raise DomainError("clt_standardized_sums: sampler needs finite mean and positive variance")
    sums = sampler.sample(rng, (reps, n)).sum(axis=1)
    return (sums - n * mu) / (math.sqrt(var) * math.sqrt(n))
