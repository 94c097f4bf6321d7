"""Weak-to-strong learning by three-hypothesis voting.

A weak learner only promises weighted error at most 1/2 - gamma on
whatever distribution it is trained on. Training three hypotheses on
carefully modified distributions (rebalance around the first's mistakes,
then concentrate on the first two's disagreements) and taking a majority
vote drives the error down to 3p^2 - 2p^3 with p = 1/2 - gamma, and
recursing on that construction pushes it below any target.

Distributions are explicit per-item weights; nothing is resampled, so
the whole pipeline is deterministic given the weak learner.
"""

from __future__ import annotations

import csv
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .distributions import DiscreteDistribution
from .errors import ConvergenceError, DegenerateSplitError, ValidationError
from .rng import RngStream

__all__ = [
    "WeightedDataset",
    "Hypothesis",
    "WeakLearner",
    "ThresholdHypothesis",
    "TableHypothesis",
    "MajorityVoteHypothesis",
    "NoisyThresholdLearner",
    "empirical_risk",
    "reweight_d2",
    "reweight_d3",
    "majority_vote",
    "boost3",
    "Boost3Diagnostics",
    "boost_error_bound",
    "boost_recursion_depth",
    "boost_recursive",
    "load_dataset",
    "dump_dataset",
]


@dataclass(frozen=True)
class WeightedDataset:
    """Labeled items (x_i, y_i) with a probability weight per item; labels
    are 0 or 1."""

    xs: np.ndarray
    ys: np.ndarray
    weights: DiscreteDistribution

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        ys = np.asarray(self.ys)
        if xs.ndim != 1 or xs.size == 0:
            raise ValidationError("WeightedDataset: xs must be a non-empty vector")
        if ys.shape != xs.shape:
            raise ValidationError("WeightedDataset: xs and ys must have equal length")
        if not np.all((ys == 0) | (ys == 1)):
            raise ValidationError("WeightedDataset: labels must be 0 or 1")
        weights = self.weights
        if not isinstance(weights, DiscreteDistribution):
            weights = DiscreteDistribution(weights)
        if len(weights) != xs.size:
            raise ValidationError("WeightedDataset: one weight per item required")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "ys", ys.astype(np.int8))
        object.__setattr__(self, "weights", weights)

    def __len__(self) -> int:
        return self.xs.size

    @classmethod
    def uniform(cls, xs, ys) -> "WeightedDataset":
        xs = np.asarray(xs, dtype=float)
        return cls(xs, ys, DiscreteDistribution.uniform(xs.size))

    def reweighted(self, weights) -> "WeightedDataset":
        return WeightedDataset(self.xs, self.ys, weights)


class Hypothesis(ABC):
    """Deterministic binary classifier: same x always gets the same label."""

    @abstractmethod
    def predict(self, x) -> int: ...

    def predict_many(self, xs) -> np.ndarray:
        return np.array([self.predict(x) for x in np.asarray(xs)], dtype=np.int8)


class WeakLearner(ABC):
    """Trainer contracted to reach weighted error <= 1/2 - gamma on the
    distribution it is handed; ``gamma`` is that advantage."""

    gamma: float

    @abstractmethod
    def train(self, dataset: WeightedDataset, rng: RngStream) -> Hypothesis: ...


class ThresholdHypothesis(Hypothesis):
    """Predicts 1 iff x >= threshold."""

    def __init__(self, threshold: float):
        self.threshold = float(threshold)

    def predict(self, x) -> int:
        return int(float(x) >= self.threshold)


class TableHypothesis(Hypothesis):
    """Memorized labels for known x values, with a fallback rule for the rest."""

    def __init__(self, table: dict, fallback: Hypothesis):
        self.table = dict(table)
        self.fallback = fallback

    def predict(self, x) -> int:
        key = float(x)
        if key in self.table:
            return int(self.table[key])
        return self.fallback.predict(x)


class MajorityVoteHypothesis(Hypothesis):
    def __init__(self, h1: Hypothesis, h2: Hypothesis, h3: Hypothesis):
        self.voters = (h1, h2, h3)

    def predict(self, x) -> int:
        return int(sum(h.predict(x) for h in self.voters) >= 2)

    def predict_many(self, xs) -> np.ndarray:
        votes = sum(h.predict_many(xs).astype(int) for h in self.voters)
        return (votes >= 2).astype(np.int8)


class NoisyThresholdLearner(WeakLearner):
    """Synthetic weak learner for a threshold concept y = 1[x >= t].

    Training predicts the true concept and then flips the label of each
    distinct x value independently with probability 1/2 - gamma, so the
    expected weighted error is exactly 1/2 - gamma on any distribution.
    The flips are frozen into a lookup table at train time, making the
    returned hypothesis deterministic; unseen x values fall back to the
    clean concept.
    """

    def __init__(self, threshold: float, gamma: float):
        if not 0 < gamma <= 0.5:
            raise ValidationError(f"NoisyThresholdLearner: gamma must be in (0, 1/2], got {gamma!r}")
        self.threshold = float(threshold)
        self.gamma = float(gamma)

    def train(self, dataset: WeightedDataset, rng: RngStream) -> Hypothesis:
        concept = ThresholdHypothesis(self.threshold)
        flip_prob = 0.5 - self.gamma
        xs = np.unique(dataset.xs)
        flips = rng.generator.random(xs.size) < flip_prob
        table = {}
        for x, flip in zip(xs, flips):
            label = concept.predict(x)
            table[float(x)] = 1 - label if flip else label
        return TableHypothesis(table, concept)


def empirical_risk(hypothesis: Hypothesis, dataset: WeightedDataset) -> float:
    """Weight of the items the hypothesis misclassifies."""
    preds = hypothesis.predict_many(dataset.xs)
    wrong = preds != dataset.ys
    return float(dataset.weights.probs[wrong].sum())


def reweight_d2(dataset: WeightedDataset, h1: Hypothesis) -> WeightedDataset:
    """Rebalance so h1's correct and incorrect items each carry weight 1/2.

    Each side is rescaled proportionally; under the result h1's weighted
    error is exactly 1/2. A perfect or totally wrong h1 leaves one side
    empty and is rejected.
    """
    preds = h1.predict_many(dataset.xs)
    wrong = preds != dataset.ys
    w = dataset.weights.probs
    risk = float(w[wrong].sum())
    if risk <= 0.0 or risk >= 1.0:
        raise DegenerateSplitError(
            f"reweight_d2: h1 risk {risk} leaves an empty side; need risk in (0, 1)"
        )
    scale = np.where(wrong, 0.5 / risk, 0.5 / (1.0 - risk))
    return dataset.reweighted(w * scale)


def reweight_d3(dataset: WeightedDataset, h1: Hypothesis, h2: Hypothesis) -> WeightedDataset:
    """Restrict the distribution to items where h1 and h2 disagree."""
    p1 = h1.predict_many(dataset.xs)
    p2 = h2.predict_many(dataset.xs)
    disagree = p1 != p2
    w = dataset.weights.probs
    total = float(w[disagree].sum())
    if total <= 0.0:
        raise DegenerateSplitError("reweight_d3: h1 and h2 agree on all weighted items")
    return dataset.reweighted(np.where(disagree, w / total, 0.0))


def majority_vote(h1: Hypothesis, h2: Hypothesis, h3: Hypothesis) -> MajorityVoteHypothesis:
    return MajorityVoteHypothesis(h1, h2, h3)


class Boost3Diagnostics(NamedTuple):
    h1_err: float
    h2_err: float
    h3_err: float
    final_err: float
    bound: float

    def to_dict(self) -> dict:
        return {
            "h1_err": self.h1_err,
            "h2_err": self.h2_err,
            "h3_err": self.h3_err,
            "final_err": self.final_err,
            "bound": self.bound,
        }


class Boost3Result(NamedTuple):
    hypothesis: Hypothesis
    diagnostics: Boost3Diagnostics


def boost3(weak: WeakLearner, dataset: WeightedDataset, rng: RngStream) -> Boost3Result:
    """One round of three-hypothesis boosting.

    h1 trains on the given distribution, h2 on the rebalanced one, h3 on
    the disagreement distribution; the result is their majority vote.
    Diagnostics report each hypothesis's error under its own training
    distribution, the vote's error under the original distribution, and
    the closed-form bound at the learner's advantage.
    """
    bound = boost_error_bound(weak.gamma)
    h1 = weak.train(dataset, rng)
    h1_err = empirical_risk(h1, dataset)
    if h1_err == 0.0:
        # already perfect: the rebalanced distribution does not exist, and
        # no vote can improve on h1
        diagnostics = Boost3Diagnostics(0.0, 0.0, 0.0, 0.0, bound)
        return Boost3Result(h1, diagnostics)
    d2 = reweight_d2(dataset, h1)
    h2 = weak.train(d2, rng)
    h2_err = empirical_risk(h2, d2)
    if np.array_equal(h1.predict_many(dataset.xs), h2.predict_many(dataset.xs)):
        # no disagreement region: the majority vote equals h1 regardless of h3
        diagnostics = Boost3Diagnostics(h1_err, h2_err, 0.0, h1_err, bound)
        return Boost3Result(h1, diagnostics)
    d3 = reweight_d3(dataset, h1, h2)
    h3 = weak.train(d3, rng)
    vote = majority_vote(h1, h2, h3)
    diagnostics = Boost3Diagnostics(
        h1_err=h1_err,
        h2_err=h2_err,
        h3_err=empirical_risk(h3, d3),
        final_err=empirical_risk(vote, dataset),
        bound=bound,
    )
    return Boost3Result(vote, diagnostics)


def boost_error_bound(gamma: float) -> float:
    """Error of the three-way vote when each voter errs at 1/2 - gamma:
    3p^2 - 2p^3 with p = 1/2 - gamma."""
    if not (0 <= gamma <= 0.5):
        raise ValidationError(f"boost_error_bound: gamma must be in [0, 1/2], got {gamma!r}")
    p = 0.5 - gamma
    return 3.0 * p * p - 2.0 * p * p * p


def boost_recursion_depth(gamma: float, target_epsilon: float, max_depth: int = 64) -> int:
    """Smallest d such that iterating p -> 3p^2 - 2p^3 d times from
    p = 1/2 - gamma lands at or below target_epsilon."""
    if not (0 < target_epsilon < 0.5):
        raise ValidationError(
            f"boost_recursion_depth: target_epsilon must be in (0, 1/2), got {target_epsilon!r}"
        )
    if not (0 <= gamma <= 0.5):
        raise ValidationError(f"boost_recursion_depth: gamma must be in [0, 1/2], got {gamma!r}")
    error = 0.5 - gamma
    depth = 0
    # absolute slop so an iterate that lands on the target up to float
    # rounding (e.g. 0.35200000000000004 vs 0.352) counts as reaching it
    while error > target_epsilon + 1e-12:
        next_error = 3.0 * error * error - 2.0 * error**3
        if not next_error < error:
            raise ConvergenceError(
                f"boost_recursion_depth: bound stalls at {error} (gamma too small)"
            )
        error = next_error
        depth += 1
        if depth > max_depth:
            raise ConvergenceError("boost_recursion_depth: exceeded max recursion depth")
    return depth


class _BoostedLearner(WeakLearner):
    """Wraps a learner so one whole boost3 round acts as a single train call."""

    def __init__(self, base: WeakLearner):
        self.base = base
        self.gamma = 0.5 - boost_error_bound(base.gamma)

    def train(self, dataset: WeightedDataset, rng: RngStream) -> Hypothesis:
        return boost3(self.base, dataset, rng).hypothesis


def boost_recursive(
    weak: WeakLearner, dataset: WeightedDataset, target_epsilon: float, rng: RngStream
) -> Hypothesis:
    """Compose boost3 with itself until the recursion-tree bound meets the target.

    Depth d (from :func:`boost_recursion_depth`) nests d layers, training
    3^d base hypotheses; depth 0 returns a single base hypothesis.
    """
    depth = boost_recursion_depth(weak.gamma, target_epsilon)
    learner: WeakLearner = weak
    for _ in range(depth):
        learner = _BoostedLearner(learner)
    return learner.train(dataset, rng)


def load_dataset(path) -> WeightedDataset:
    """Read 'x,y' CSV rows (optional header) into a uniform-weight dataset."""
    xs, ys = [], []
    with open(path, newline="") as fh:
        for row_no, row in enumerate(csv.reader(fh), 1):
            if not row or (row_no == 1 and row[0].strip().lower() == "x"):
                continue
            if len(row) != 2:
                raise ValidationError(f"{path}:{row_no}: expected 'x,y', got {row!r}")
            try:
                xs.append(float(row[0]))
                label = int(row[1])
            except ValueError:
                raise ValidationError(f"{path}:{row_no}: non-numeric row {row!r}") from None
            ys.append(label)
    if not xs:
        raise ValidationError(f"{path}: no data rows")
    return WeightedDataset.uniform(np.array(xs), np.array(ys))


def dump_dataset(dataset: WeightedDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in zip(dataset.xs, dataset.ys):
            writer.writerow([repr(float(x)), int(y)])
