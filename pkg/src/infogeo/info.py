"""Base-2 information measures."""

import numpy as np


def entropy(p):
    """Shannon entropy in bits, with 0 log 0 = 0."""
    p = np.asarray(p, dtype=float)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log2(p[nz])))


def kl_divergence(p, q):
    """D_KL(p || q) in bits.

    Terms with p = 0 contribute nothing; any p > 0 where q = 0 makes the
    divergence ``inf``.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise ValueError(f"support mismatch: {p.shape} vs {q.shape}")
    nz = p > 0
    if np.any(q[nz] <= 0):
        return float("inf")
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))


def row_kl(p, q):
    """Row-wise D_KL for two (n, k) tables; ``inf`` rows where support fails."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * (np.log2(p) - np.log2(q)), 0.0)
    return terms.sum(axis=-1)


def action_marginal(policy, state_dist):
    """Policy marginalised over a state distribution: p(a) = sum_s pi(a|s) p(s)."""
    policy = np.asarray(policy, dtype=float)
    state_dist = np.asarray(state_dist, dtype=float)
    if policy.ndim != 2 or policy.shape[0] != state_dist.shape[0]:
        raise ValueError(
            f"policy rows ({policy.shape[0]}) and state distribution ({state_dist.shape[0]}) differ"
        )
    marginal = state_dist @ policy
    return marginal / marginal.sum()
