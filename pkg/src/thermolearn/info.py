"""Entropy, divergence, and mutual-information measures on finite distributions.

Everything internal is computed in natural log (nats); base conversion
happens only at the Shannon-entropy API. The convention 0*log(0) = 0 by
continuity applies throughout.
"""

from __future__ import annotations

import math
from typing import Iterable, Tuple

import numpy as np

from .distributions import DiscreteDistribution, JointDistribution, as_distribution, as_joint
from .errors import DomainError, ValidationError

__all__ = [
    "entropy_nats",
    "entropy_shannon",
    "entropy_gibbs",
    "info_gain",
    "kl_divergence",
    "mutual_information",
    "ib_objective",
]


def entropy_nats(dist) -> float:
    """-sum p_i ln p_i, with 0 ln 0 = 0."""
    p = as_distribution(dist).probs
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def entropy_shannon(dist, log_base: float = 2.0) -> float:
    """Shannon entropy -sum p_i log_base(p_i).

    ``log_base`` must exceed 1; base 2 gives bits, base e gives nats.
    """
    if not (log_base > 1.0):
        raise ValidationError(f"entropy_shannon: log_base must be > 1, got {log_base!r}")
    return entropy_nats(dist) / math.log(log_base)


def entropy_gibbs(dist, k_B: float = 1.0) -> float:
    """Thermodynamic entropy -k_B sum p_i ln p_i.

    For the uniform distribution over Omega states this equals k_B ln Omega.
    """
    if not (k_B > 0):
        raise ValidationError(f"entropy_gibbs: k_B must be positive, got {k_B!r}")
    return k_B * entropy_nats(dist)


def info_gain(parent, children: Iterable[Tuple[float, "DiscreteDistribution"]], log_base: float = 2.0) -> float:
    """Entropy reduction from splitting ``parent`` into weighted children.

    H(parent) - sum_c w_c H(child_c), in bits by default. Child weights
    must sum to 1.
    """
    children = [(float(w), as_distribution(d)) for w, d in children]
    if not children:
        raise ValidationError("info_gain: need at least one child")
    weights = np.array([w for w, _ in children])
    if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
        raise ValidationError("info_gain: child weights must be non-negative and sum to 1")
    split_entropy = sum(w * entropy_shannon(d, log_base) for w, d in children)
    return entropy_shannon(parent, log_base) - split_entropy


def kl_divergence(q, p) -> float:
    """Kullback-Leibler divergence KL(q || p) = sum q_i ln(q_i / p_i), in nats.

    Requires q absolutely continuous w.r.t. p: any outcome with p_i = 0
    must also have q_i = 0, otherwise a DomainError is raised (rather
    than returning +inf) so callers handle support mismatches explicitly.
    """
    q = as_distribution(q).probs
    p = as_distribution(p).probs
    if q.shape != p.shape:
        raise ValidationError("kl_divergence: distributions must share a support size")
    bad = (p == 0) & (q > 0)
    if np.any(bad):
        raise DomainError(f"kl_divergence: q has mass on outcomes {np.flatnonzero(bad).tolist()} where p is zero")
    mask = q > 0
    return float((q[mask] * np.log(q[mask] / p[mask])).sum())


def mutual_information(joint) -> float:
    """I = sum_{x,t} p(x,t) ln[ p(x,t) / (p(x) p(t)) ], in nats."""
    joint = as_joint(joint)
    table = joint.table
    px = joint.marginal_rows().probs
    pt = joint.marginal_cols().probs
    outer = np.outer(px, pt)
    mask = table > 0
    return float((table[mask] * np.log(table[mask] / outer[mask])).sum())


def ib_objective(joint_xt, joint_ty, beta: float) -> float:
    """Information-bottleneck value I(X;T) - beta * I(T;Y).

    Trades compression of the representation against the relevance it
    retains; beta >= 0 sets the exchange rate.
    """
    if beta < 0:
        raise ValidationError(f"ib_objective: beta must be non-negative, got {beta!r}")
    return mutual_information(joint_xt) - beta * mutual_information(joint_ty)
