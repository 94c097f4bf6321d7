import numpy as np
import pytest

from thermolearn.distributions import DiscreteDistribution
from thermolearn.boost import (
    NoisyThresholdLearner,
    TableHypothesis,
    ThresholdHypothesis,
    WeightedDataset,
    boost3,
    boost_error_bound,
    boost_recursion_depth,
    boost_recursive,
    dump_dataset,
    empirical_risk,
    load_dataset,
    majority_vote,
    reweight_d2,
    reweight_d3,
)
from thermolearn.errors import ConvergenceError, DegenerateSplitError, ValidationError
from thermolearn.rng import RngStream


def threshold_data(n, threshold, seed):
    rng = RngStream(seed)
    xs = rng.random(size=n)
    ys = (xs >= threshold).astype(int)
    return WeightedDataset.uniform(xs, ys)


class FixedHypothesis:
    """Constant-label stub obeying the Hypothesis protocol."""

    def __init__(self, label):
        self.label = label

    def predict(self, x):
        return self.label

    def predict_many(self, xs):
        return np.full(len(xs), self.label, dtype=int)


# --- dataset -----------------------------------------------------------------


def test_dataset_validation():
    with pytest.raises(ValidationError):
        WeightedDataset.uniform([0.1, 0.2], [0, 2])
    with pytest.raises(ValidationError):
        WeightedDataset.uniform([0.1], [0, 1])


def test_uniform_weights():
    ds = WeightedDataset.uniform([0.1, 0.2, 0.3, 0.4], [0, 0, 1, 1])
    assert np.allclose(ds.weights.probs, 0.25)
    assert len(ds) == 4


def test_reweighted_keeps_items():
    ds = WeightedDataset.uniform([0.1, 0.2], [0, 1])
    out = ds.reweighted([0.9, 0.1])
    assert np.allclose(out.xs, ds.xs)
    assert np.allclose(out.weights.probs, [0.9, 0.1])


# --- hypotheses and risk --------------------------------------------------------


def test_threshold_hypothesis_predicts_indicator():
    h = ThresholdHypothesis(0.5)
    assert h.predict(0.49) == 0
    assert h.predict(0.5) == 1
    assert list(h.predict_many(np.array([0.2, 0.7]))) == [0, 1]


def test_table_hypothesis_overrides_fallback():
    base = ThresholdHypothesis(0.5)
    h = TableHypothesis({0.2: 1}, base)
    assert h.predict(0.2) == 1
    assert h.predict(0.7) == 1
    assert h.predict(0.3) == 0


def test_risk_perfect_and_constant():
    ds = threshold_data(100, 0.5, seed=0)
    perfect = ThresholdHypothesis(0.5)
    assert empirical_risk(perfect, ds) == 0.0
    balanced = WeightedDataset.uniform([0.0, 1.0], [0, 1])
    assert empirical_risk(FixedHypothesis(0), balanced) == pytest.approx(0.5)


def test_risk_counts_weighted_mistakes():
    ds = WeightedDataset(
        xs=np.array([0.1, 0.9]),
        ys=np.array([1, 1], dtype=np.int8),
        weights=DiscreteDistribution([0.3, 0.7]),
    )
    h = ThresholdHypothesis(0.5)  # wrong on the weight-0.3 item only
    assert empirical_risk(h, ds) == pytest.approx(0.3)


# --- reweighting -----------------------------------------------------------------


def test_d2_balanced_hypothesis_is_fixed_point():
    ds = WeightedDataset.uniform([0.1, 0.9], [1, 1])
    h = ThresholdHypothesis(0.5)  # wrong on one of two uniform items
    out = reweight_d2(ds, h)
    assert np.allclose(out.weights.probs, ds.weights.probs)


def test_d2_hand_value():
    ds = WeightedDataset.uniform([0.1, 0.2, 0.3, 0.9], [1, 0, 0, 1])
    h = ThresholdHypothesis(0.5)  # wrong only on x=0.1
    out = reweight_d2(ds, h)
    expect = [0.5, 1 / 6, 1 / 6, 1 / 6]
    assert np.allclose(out.weights.probs, expect)
    assert out.weights.probs.sum() == pytest.approx(1.0)


def test_d2_degenerate_risks():
    ds = WeightedDataset.uniform([0.1, 0.9], [0, 1])
    with pytest.raises(DegenerateSplitError):
        reweight_d2(ds, ThresholdHypothesis(0.5))  # risk 0
    all_zero = WeightedDataset.uniform([0.1, 0.9], [0, 0])
    with pytest.raises(DegenerateSplitError):
        reweight_d2(all_zero, FixedHypothesis(1))  # risk 1


def test_d3_point_mass_on_single_disagreement():
    ds = WeightedDataset.uniform([0.1, 0.5, 0.9], [0, 1, 1])
    h1 = ThresholdHypothesis(0.5)
    h2 = ThresholdHypothesis(0.7)  # disagree only on x=0.5
    out = reweight_d3(ds, h1, h2)
    assert np.allclose(out.weights.probs, [0.0, 1.0, 0.0])


def test_d3_renormalizes_disagreement_weights():
    ds = WeightedDataset(
        xs=np.array([0.1, 0.5, 0.6, 0.9]),
        ys=np.array([0, 1, 1, 1], dtype=np.int8),
        weights=__import__("thermolearn").DiscreteDistribution([0.4, 0.1, 0.3, 0.2]),
    )
    h1 = ThresholdHypothesis(0.5)
    h2 = ThresholdHypothesis(0.7)  # disagree on x in {0.5, 0.6}: weights 0.1, 0.3
    out = reweight_d3(ds, h1, h2)
    assert np.allclose(out.weights.probs, [0.0, 0.25, 0.75, 0.0])


def test_d3_identical_hypotheses_error():
    ds = WeightedDataset.uniform([0.1, 0.9], [0, 1])
    h = ThresholdHypothesis(0.5)
    with pytest.raises(DegenerateSplitError):
        reweight_d3(ds, h, h)


# --- majority vote -----------------------------------------------------------------


def test_vote_unanimous_and_two_of_three():
    ones = FixedHypothesis(1)
    zeros = FixedHypothesis(0)
    assert majority_vote(ones, ones, ones).predict(0.3) == 1
    assert majority_vote(ones, ones, zeros).predict(0.3) == 1
    assert majority_vote(zeros, ones, zeros).predict(0.3) == 0


def test_vote_ignores_third_when_first_two_agree():
    ds = threshold_data(50, 0.5, seed=1)
    h = ThresholdHypothesis(0.5)
    voted = majority_vote(h, h, FixedHypothesis(0))
    assert np.array_equal(voted.predict_many(ds.xs), h.predict_many(ds.xs))


# --- error bound and recursion depth ---------------------------------------------------


def test_bound_frozen_values():
    assert boost_error_bound(0.5) == 0.0
    assert boost_error_bound(0.0) == 0.5
    assert abs(boost_error_bound(0.1) - 0.352) < 1e-12


def test_bound_strictly_improves_nontrivial_advantage():
    for gamma in (0.05, 0.1, 0.25, 0.4):
        assert boost_error_bound(gamma) < 0.5 - gamma


def test_bound_validation():
    with pytest.raises(ValidationError):
        boost_error_bound(-0.01)
    with pytest.raises(ValidationError):
        boost_error_bound(0.51)


def test_depth_examples():
    assert boost_recursion_depth(0.1, 0.352) == 1
    assert boost_recursion_depth(0.1, 0.45) == 0
    # iterating e -> 3e^2 - 2e^3 from 0.4: 0.352, 0.2845, 0.1967, 0.1009, 0.0285
    assert boost_recursion_depth(0.1, 0.1) == 5


def test_depth_stall_detection():
    with pytest.raises(ConvergenceError):
        boost_recursion_depth(1e-9, 0.01, max_depth=50)


# --- boosting end to end -----------------------------------------------------------------


def test_boost3_diagnostics_and_improvement():
    ds = threshold_data(10000, 0.5, seed=3)
    weak = NoisyThresholdLearner(0.5, gamma=0.1)
    result = boost3(weak, ds, RngStream(3))
    d = result.diagnostics
    for err in (d.h1_err, d.h2_err, d.h3_err):
        assert err <= 0.5 - weak.gamma + 1e-9
    assert d.bound == pytest.approx(0.352)
    assert d.final_err <= 0.402
    assert empirical_risk(result.hypothesis, ds) == pytest.approx(d.final_err)


def test_boost3_perfect_learner_stays_perfect():
    ds = threshold_data(500, 0.5, seed=4)

    class PerfectLearner:
        gamma = 0.5

        def train(self, dataset, rng):
            return ThresholdHypothesis(0.5)

    result = boost3(PerfectLearner(), ds, RngStream(0))
    assert result.diagnostics.final_err == 0.0


def test_boost3_to_dict_round_trips_floats():
    ds = threshold_data(2000, 0.5, seed=5)
    result = boost3(NoisyThresholdLearner(0.5, 0.15), ds, RngStream(1))
    payload = result.diagnostics.to_dict()
    assert set(payload) == {"h1_err", "h2_err", "h3_err", "final_err", "bound"}
    assert all(isinstance(v, float) for v in payload.values())


def test_recursive_boost_beats_target():
    ds = threshold_data(4000, 0.5, seed=6)
    weak = NoisyThresholdLearner(0.5, gamma=0.15)
    hypothesis = boost_recursive(weak, ds, target_epsilon=0.2, rng=RngStream(2))
    assert empirical_risk(hypothesis, ds) <= 0.2 + 0.05


def test_recursive_depth_zero_returns_base_output():
    ds = threshold_data(1000, 0.5, seed=7)
    weak = NoisyThresholdLearner(0.5, gamma=0.1)
    hypothesis = boost_recursive(weak, ds, target_epsilon=0.45, rng=RngStream(3))
    assert empirical_risk(hypothesis, ds) <= 0.45 + 0.05


# --- persistence ---------------------------------------------------------------------------


def test_dataset_file_roundtrip(tmp_path):
    ds = threshold_data(50, 0.5, seed=8)
    path = tmp_path / "data.csv"
    dump_dataset(ds, path)
    back = load_dataset(path)
    assert np.allclose(back.xs, ds.xs)
    assert np.array_equal(back.ys, ds.ys)
    assert np.allclose(back.weights.probs, ds.weights.probs)
