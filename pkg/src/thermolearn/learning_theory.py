"""Sample-complexity and approximation-quality bounds."""

from __future__ import annotations

import math

from .errors import ValidationError

__all__ = ["pac_sample_bound", "approximation_ratio"]


def pac_sample_bound(epsilon: float, delta: float, hypothesis_count: int, k: float = 0.0) -> int:
    """Samples sufficient to PAC-learn a finite hypothesis class.

    Returns ceil((1/epsilon) * (ln(|H| / delta) + k)), clamped at zero.
    Natural log is used; accuracy epsilon and confidence delta must lie
    in (0, 1].
    """
    if not 0.0 < epsilon <= 1.0:
        raise ValidationError(f"pac_sample_bound: epsilon must be in (0, 1], got {epsilon!r}")
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"pac_sample_bound: delta must be in (0, 1], got {delta!r}")
    if hypothesis_count < 1:
        raise ValidationError(f"pac_sample_bound: hypothesis_count must be >= 1, got {hypothesis_count!r}")
    if not math.isfinite(k):
        raise ValidationError("pac_sample_bound: k must be finite")
    bound = (math.log(hypothesis_count / delta) + k) / epsilon
    return max(0, math.ceil(bound))


def approximation_ratio(cost: float, optimal_cost: float) -> float:
    """Performance ratio max(C/C*, C*/C) of a solution against the optimum.

    Symmetric in its arguments and always >= 1; both costs must be
    strictly positive.
    """
    if not (cost > 0 and optimal_cost > 0):
        raise ValidationError("approximation_ratio: both costs must be strictly positive")
    return max(cost / optimal_cost, optimal_cost / cost)
