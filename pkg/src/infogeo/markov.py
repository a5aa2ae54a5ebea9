"""Absorbing Markov chains induced by a policy on an MDP.

The fundamental matrix N = (I - Q)^-1 of the transient block Q is never
formed explicitly; every quantity derived from it goes through one LU
factorisation of I - Q.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from infogeo.errors import AllTruncatedError, NonAbsorbingError
from infogeo.mdp import Mdp

PIVOT_TOL = 1e-12
POLICY_TOL = 1e-10


@dataclass(frozen=True)
class LiveDistribution:
    """Where an agent is while it is still deciding.

    ``probabilities`` is over all states with zero mass on the goal;
    ``live_times[i]`` is the expected number of steps to absorption from i.
    """

    probabilities: np.ndarray
    live_times: np.ndarray


@dataclass(frozen=True)
class VisitationStats:
    start: int
    proportions: np.ndarray
    mean_visits: np.ndarray
    completed: int
    truncated: int
    mean_length: float


def check_policy(mdp: Mdp, policy) -> np.ndarray:
    policy = np.asarray(policy, dtype=float)
    if policy.shape != (mdp.n_states, mdp.n_actions):
        raise ValueError(
            f"policy shape {policy.shape} does not match MDP ({mdp.n_states}, {mdp.n_actions})"
        )
    if np.any(policy < 0) or np.any(np.abs(policy.sum(axis=1) - 1.0) > POLICY_TOL):
        raise ValueError("policy rows must be probability distributions")
    return policy


def chain_from_policy(mdp: Mdp, policy) -> np.ndarray:
    """State-to-state kernel p(s'|s) = sum_a pi(a|s) p(s'|s, a)."""
    policy = check_policy(mdp, policy)
    return np.einsum("sa,ast->st", policy, mdp.transition)


def factor_transient(q_block, goal: int):
    """LU factors of I - Q for the transient block ``q_block``."""
    a = np.eye(q_block.shape[0]) - q_block
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)) or pivots.min() < PIVOT_TOL:
        raise NonAbsorbingError(
            f"goal {goal} is not reachable from every state (smallest pivot {pivots.min():.3g})"
        )
    return lu, piv


def live_from_factor(lu_piv) -> tuple[np.ndarray, np.ndarray]:
    """(p, l) on the transient block from the factors of I - Q."""
    m = lu_piv[0].shape[0]
    l = scipy.linalg.lu_solve(lu_piv, np.ones(m), check_finite=False)
    # p_j = sum_i u_i n_ij / l_i with uniform u, i.e. (u / l)^T N
    p = scipy.linalg.lu_solve(lu_piv, 1.0 / (m * l), trans=1, check_finite=False)
    return p / p.sum(), l


class AbsorbingChain:
    """LU-factorised transient block of the chain induced by ``policy``."""

    def __init__(self, mdp: Mdp, policy):
        self.mdp = mdp
        self.kernel = chain_from_policy(mdp, policy)
        self.transient = mdp.transient
        t = self.transient
        self._lu = None
        if len(t) == 0:
            return
        self._lu = factor_transient(self.kernel[np.ix_(t, t)], mdp.goal)

    def accumulate(self, per_step) -> np.ndarray:
        """Expected sum of ``per_step[s]`` over a trajectory until absorption.

        Returns x over all states with x[goal] = 0, i.e. x = N c on the
        transient block.
        """
        per_step = np.asarray(per_step, dtype=float)
        out = np.zeros(self.mdp.n_states)
        if self._lu is not None:
            out[self.transient] = scipy.linalg.lu_solve(self._lu, per_step[self.transient])
        return out

    def visits_from(self, start: int) -> np.ndarray:
        """Row ``start`` of N: expected visits to each state before absorption."""
        out = np.zeros(self.mdp.n_states)
        if start == self.mdp.goal or self._lu is None:
            return out
        e = np.zeros(len(self.transient))
        e[np.searchsorted(self.transient, start)] = 1.0
        out[self.transient] = scipy.linalg.lu_solve(self._lu, e, trans=1)
        return out

    def live_distribution(self) -> LiveDistribution:
        n = self.mdp.n_states
        probs = np.zeros(n)
        times = np.zeros(n)
        if self._lu is None:
            return LiveDistribution(probs, times)
        probs[self.transient], times[self.transient] = live_from_factor(self._lu)
        return LiveDistribution(probs, times)


def live_distribution(mdp: Mdp, policy) -> LiveDistribution:
    """Live state distribution from a uniform start over transient states."""
    return AbsorbingChain(mdp, policy).live_distribution()


def expected_visits(mdp: Mdp, policy, start: int) -> np.ndarray:
    return AbsorbingChain(mdp, policy).visits_from(start)


def hitting_probabilities(mdp: Mdp, policy, start: int) -> np.ndarray:
    """Probability that a trajectory from ``start`` ever passes through each state.

    For transient j, h_j = n_start,j / n_jj; the goal is always hit.
    """
    chain = AbsorbingChain(mdp, policy)
    visits = chain.visits_from(start)
    h = np.zeros(mdp.n_states)
    for j in chain.transient:
        if visits[j] > 0:
            h[j] = visits[j] / chain.visits_from(j)[j]
    h[mdp.goal] = 1.0
    h[start] = 1.0
    return h


def policy_value(mdp: Mdp, policy) -> np.ndarray:
    """Undiscounted V^pi(s) by solving the Bellman equation exactly."""
    policy = check_policy(mdp, policy)
    chain = AbsorbingChain(mdp, policy)
    step_reward = np.sum(policy * mdp.expected_reward(), axis=1)
    return chain.accumulate(step_reward)


def sample_trajectories(
    mdp: Mdp,
    policy,
    start: int,
    count: int,
    seed: int = 0,
    max_steps: int | None = None,
) -> VisitationStats:
    """Roll out ``count`` independent trajectories from ``start``.

    The rollouts are vectorised across trajectories and drawn from a PCG64
    generator seeded with ``seed``, so results are bit-reproducible for a
    given (seed, count, max_steps). Proportions and visit counts are taken
    over completed trajectories only.
    """
    policy = check_policy(mdp, policy)
    if count < 1:
        raise ValueError("count must be at least 1")
    if max_steps is None:
        max_steps = 100 * mdp.n_states
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    if not 0 <= start < mdp.n_states:
        raise ValueError(f"start state {start} out of range")

    rng = np.random.default_rng(seed)
    n = mdp.n_states
    policy_cdf = np.cumsum(policy, axis=1)
    policy_cdf[:, -1] = 1.0
    move_cdf = np.cumsum(mdp.transition, axis=2)
    move_cdf[..., -1] = 1.0

    state = np.full(count, start)
    steps = np.zeros(count, dtype=np.int64)
    visits = np.zeros((count, n), dtype=np.int32)
    active = state != mdp.goal
    visits[np.arange(count), state] += 1
    for _ in range(max_steps):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        s = state[idx]
        u = rng.random((2, idx.size))
        a = (u[0][:, None] > policy_cdf[s]).sum(axis=1)
        nxt = (u[1][:, None] > move_cdf[a, s]).sum(axis=1)
        state[idx] = nxt
        steps[idx] += 1
        visits[idx, nxt] += 1
        active[idx] = nxt != mdp.goal

    done = ~active
    completed = int(done.sum())
    if completed == 0:
        raise AllTruncatedError(f"none of {count} trajectories reached the goal in {max_steps} steps")
    # the goal visit is the absorption event, not a decision
    visits[:, mdp.goal] = np.minimum(visits[:, mdp.goal], 1)
    kept = visits[done]
    return VisitationStats(
        start=start,
        proportions=(kept > 0).mean(axis=0),
        mean_visits=np.where(np.arange(n) == mdp.goal, 0.0, kept.mean(axis=0)),
        completed=completed,
        truncated=count - completed,
        mean_length=float(steps[done].mean()),
    )
