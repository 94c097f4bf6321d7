"""Finite probability distributions and joint tables.

These two containers are the backbone of every entropy, divergence, and
posterior computation in the package. Validation is strict: entries must
be non-negative and sum to one within ``SUM_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

SUM_TOL = 1e-9


def _checked_probs(values, name: str) -> np.ndarray:
    probs = np.asarray(values, dtype=float)
    if probs.size == 0:
        raise ValidationError(f"{name}: must be non-empty")
    if not np.all(np.isfinite(probs)):
        raise ValidationError(f"{name}: entries must be finite")
    if np.any(probs < 0):
        raise ValidationError(f"{name}: entries must be non-negative")
    total = float(probs.sum())
    if abs(total - 1.0) > SUM_TOL:
        raise ValidationError(f"{name}: entries sum to {total!r}, expected 1 within {SUM_TOL}")
    return probs


@dataclass(frozen=True)
class DiscreteDistribution:
    """Probability vector over a finite outcome set, optionally labelled."""

    probs: np.ndarray
    labels: Optional[Sequence] = None

    def __post_init__(self):
        object.__setattr__(self, "probs", _checked_probs(self.probs, "DiscreteDistribution"))
        if self.labels is not None and len(self.labels) != self.probs.size:
            raise ValidationError("DiscreteDistribution: labels length must match probs")

    def __len__(self):
        return self.probs.size

    def __getitem__(self, i):
        return float(self.probs[i])

    @classmethod
    def uniform(cls, n: int) -> "DiscreteDistribution":
        if n < 1:
            raise ValidationError("uniform: need at least one outcome")
        return cls(np.full(n, 1.0 / n))

    @classmethod
    def point_mass(cls, index: int, n: int) -> "DiscreteDistribution":
        probs = np.zeros(n)
        probs[index] = 1.0
        return cls(probs)

    def mean(self) -> float:
        """Mean of the integer support 0..n-1."""
        return float(np.arange(len(self)) @ self.probs)


def as_distribution(dist) -> DiscreteDistribution:
    """Coerce an array-like of probabilities into a validated distribution."""
    if isinstance(dist, DiscreteDistribution):
        return dist
    return DiscreteDistribution(np.asarray(dist, dtype=float))


@dataclass(frozen=True)
class JointDistribution:
    """Joint probability table over outcome pairs, rows = X, columns = T."""

    table: np.ndarray = field()

    def __post_init__(self):
        table = np.asarray(self.table, dtype=float)
        if table.ndim != 2 or table.size == 0:
            raise ValidationError("JointDistribution: table must be a non-empty 2-D array")
        _checked_probs(table.ravel(), "JointDistribution")
        object.__setattr__(self, "table", table)

    @property
    def shape(self):
        return self.table.shape

    def marginal_rows(self) -> DiscreteDistribution:
        """Marginal over the row variable (sum over columns)."""
        return DiscreteDistribution(self.table.sum(axis=1))

    def marginal_cols(self) -> DiscreteDistribution:
        """Marginal over the column variable (sum over rows)."""
        return DiscreteDistribution(self.table.sum(axis=0))

    @classmethod
    def from_independent(cls, row: DiscreteDistribution, col: DiscreteDistribution) -> "JointDistribution":
        return cls(np.outer(row.probs, col.probs))

    @classmethod
    def diagonal(cls, dist: DiscreteDistribution) -> "JointDistribution":
        return cls(np.diag(dist.probs))


def as_joint(joint) -> JointDistribution:
    if isinstance(joint, JointDistribution):
        return joint
    return JointDistribution(np.asarray(joint, dtype=float))
