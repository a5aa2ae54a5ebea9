"""Free-energy optimal policies under a Decision Information constraint.

The solver alternates a Blahut-Arimoto style prior update with a soft
Bellman backup:

1. live state distribution of the current policy,
2. action prior = policy marginalised over that distribution,
3. Q_F(s, a) = sum_s' p(s'|s,a) (r(s',s,a) - F(s')),
4. Z(s) = sum_a prior(a) 2^(beta Q_F(s, a)),
5. F(s) = -log2 Z(s) / beta,
6. pi(a|s) = prior(a) 2^(beta Q_F(s, a)) / Z(s),

until F moves by at most ``eps_F`` and every policy row moves by at most
``eps_pi`` bits of KL. All information quantities are in bits, and the
Boltzmann weights use base 2 to match.

The reported free energy is I_D / beta - V of the returned policy under its
own action prior, evaluated exactly. The raw iterate differs from it by the
convergence slack (up to ~1e-4 at beta = 0.01) and is kept separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from infogeo.errors import (
    DivergenceError,
    NoConvergenceError,
    NonAbsorbingError,
    NumericalUnderflowError,
    OverlappingSupportsError,
)
from infogeo.info import action_marginal, row_kl
from infogeo.markov import AbsorbingChain, check_policy, factor_transient, live_from_factor
from infogeo.mdp import Mdp

LN2 = np.log(2.0)


@dataclass(frozen=True)
class SolverConfig:
    beta: float
    eps_F: float = 1e-5
    eps_pi: float = 1e-5
    max_iters: int = 10_000
    prior_floor: float = 1e-12

    def __post_init__(self):
        if not (self.beta > 0 and np.isfinite(self.beta)):
            raise ValueError(f"beta must be a positive finite number, got {self.beta}")
        if not (self.eps_F > 0 and self.eps_pi > 0):
            raise ValueError("convergence thresholds must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0 <= self.prior_floor < 1:
            raise ValueError("prior_floor must lie in [0, 1)")


@dataclass(frozen=True, eq=False)
class SolveResult:
    beta: float
    goal: int
    policy: np.ndarray
    free_energy: np.ndarray
    decision_information: np.ndarray
    value: np.ndarray
    action_prior: np.ndarray
    live_distribution: np.ndarray
    iterations: int
    converged: bool
    residual_F: float
    residual_pi: float
    # last -log2(Z)/beta iterate; ``free_energy`` is the exact evaluation of ``policy``
    free_energy_iterate: np.ndarray = None

    def to_dict(self) -> dict:
        return {
            "beta": float(self.beta),
            "goal": int(self.goal),
            "F": self.free_energy.tolist(),
            "I_D": self.decision_information.tolist(),
            "V": self.value.tolist(),
            "policy": self.policy.tolist(),
            "prior": self.action_prior.tolist(),
            "live": self.live_distribution.tolist(),
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }


def floored_prior(prior, floor: float) -> np.ndarray:
    prior = np.maximum(np.asarray(prior, dtype=float), floor)
    return prior / prior.sum()


def decision_information(mdp: Mdp, policy, prior) -> np.ndarray:
    """Expected bits of deviation from ``prior`` accumulated until absorption.

    Solves I(s) = sum_a pi(a|s) [log2(pi(a|s)/prior(a)) + E I(s')] with
    I(goal) = 0. ``prior`` is either one action distribution shared by all
    states or a per-state table of shape (n_states, n_actions).
    """
    policy = check_policy(mdp, policy)
    prior = np.broadcast_to(np.asarray(prior, dtype=float), policy.shape)
    step = row_kl(policy, prior)
    step[mdp.goal] = 0.0
    if not np.all(np.isfinite(step)):
        bad = int(np.flatnonzero(~np.isfinite(step))[0])
        raise ValueError(f"prior assigns zero mass to an action the policy uses in state {bad}")
    try:
        chain = AbsorbingChain(mdp, policy)
    except NonAbsorbingError as exc:
        raise DivergenceError(f"decision information diverges: {exc}") from exc
    return chain.accumulate(step)


def policy_free_energy(mdp: Mdp, policy, beta: float, prior) -> np.ndarray:
    """F = I_D / beta - V for an arbitrary policy and prior (shared or per-state)."""
    policy = check_policy(mdp, policy)
    prior = np.broadcast_to(np.asarray(prior, dtype=float), policy.shape)
    step = row_kl(policy, prior) / beta - np.sum(policy * mdp.expected_reward(), axis=1)
    step[mdp.goal] = 0.0
    if not np.all(np.isfinite(step)):
        raise ValueError("prior assigns zero mass to an action the policy uses")
    try:
        chain = AbsorbingChain(mdp, policy)
    except NonAbsorbingError as exc:
        raise DivergenceError(f"free energy diverges: {exc}") from exc
    return chain.accumulate(step)


def _prior_of(chain: AbsorbingChain, policy, floor: float) -> tuple[np.ndarray, np.ndarray]:
    live = chain.live_distribution().probabilities
    return live, floored_prior(action_marginal(policy, live), floor)


def _trivial_result(mdp: Mdp, config: SolverConfig) -> SolveResult:
    n, m = mdp.n_states, mdp.n_actions
    zeros = np.zeros(n)
    return SolveResult(
        config.beta, mdp.goal, np.full((n, m), 1.0 / m), zeros, zeros.copy(), zeros.copy(),
        np.full(m, 1.0 / m), zeros.copy(), 0, True, 0.0, 0.0, zeros.copy(),
    )


def solve(mdp: Mdp, config: SolverConfig, init_policy=None) -> SolveResult:
    """Free-energy optimal policy, free energy and Decision Information.

    Starts from the uniform policy unless ``init_policy`` is given (warm
    starts only change the path, not the fixed point being sought). On
    hitting ``max_iters`` raises :class:`NoConvergenceError` whose
    ``result`` carries the last iterate with ``converged=False``.
    """
    if len(mdp.transient) == 0:
        return _trivial_result(mdp, config)
    beta = float(config.beta)
    n, m = mdp.n_states, mdp.n_actions
    goal = mdp.goal
    reward = mdp.expected_reward()

    if init_policy is None:
        policy = np.full((n, m), 1.0 / m)
    else:
        policy = check_policy(mdp, init_policy).copy()
    t = mdp.transient
    p_tt = np.ascontiguousarray(mdp.transition[:, t][:, :, t])
    p_next = mdp.transition
    free_energy = np.zeros(n)
    converged = False
    d_f = d_pi = np.inf
    iteration = 0
    for iteration in range(1, config.max_iters + 1):
        q_block = np.einsum("sa,ast->st", policy[t], p_tt)
        live, _ = live_from_factor(factor_transient(q_block, goal))
        prior = floored_prior(live @ policy[t], config.prior_floor)

        q = reward - np.einsum("ast,t->sa", p_next, free_energy)
        # natural-log logits of prior(a) * 2^(beta q), max-shifted; overflow to -inf is caught below
        with np.errstate(over="ignore"):
            logits = LN2 * beta * q + np.log(prior)[None, :]
        top = logits.max(axis=1)
        if not np.all(np.isfinite(top)):
            bad = int(np.flatnonzero(~np.isfinite(top))[0])
            raise NumericalUnderflowError(f"all Boltzmann weights vanished in state {bad}")
        weights = np.exp(logits - top[:, None])
        total = weights.sum(axis=1)
        log_z = top + np.log(total)
        new_f = -log_z / (LN2 * beta)
        new_f[goal] = 0.0
        new_policy = weights / total[:, None]

        d_f = float(np.max(np.abs(new_f - free_energy)))
        d_pi = float(np.max(row_kl(new_policy, policy)))
        free_energy, policy = new_f, new_policy
        if d_f <= config.eps_F and d_pi <= config.eps_pi:
            converged = True
            break

    result = _finish(mdp, config, policy, free_energy, iteration, converged, d_f, d_pi)
    if not converged:
        raise NoConvergenceError(
            f"free-energy iteration for goal {goal}, beta={beta:g} did not converge in "
            f"{config.max_iters} iterations (dF={d_f:.3g}, dKL={d_pi:.3g})",
            result=result,
            residuals={"F": d_f, "pi": d_pi},
        )
    return result


def _finish(mdp, config, policy, free_energy, iterations, converged, d_f, d_pi) -> SolveResult:
    chain = AbsorbingChain(mdp, policy)
    live, prior = _prior_of(chain, policy, config.prior_floor)
    info = decision_information(mdp, policy, prior)
    value = chain.accumulate(np.sum(policy * mdp.expected_reward(), axis=1))
    return SolveResult(
        beta=float(config.beta),
        goal=mdp.goal,
        policy=policy,
        free_energy=info / config.beta - value,
        decision_information=info,
        value=value,
        action_prior=prior,
        live_distribution=live,
        iterations=iterations,
        converged=converged,
        residual_F=d_f,
        residual_pi=d_pi,
        free_energy_iterate=free_energy,
    )


@dataclass(frozen=True)
class TradeoffPoint:
    beta: float
    expected_value: float
    expected_information: float
    converged: bool


def tradeoff_curve(mdp: Mdp, betas: Sequence[float], config: Optional[SolverConfig] = None):
    """Uniform-state expectations of V and I_D along an ascending beta sweep.

    Each solve is warm-started from the previous beta's policy.
    """
    betas = [float(b) for b in betas]
    if any(b <= 0 for b in betas):
        raise ValueError("betas must be strictly positive")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValueError("betas must be sorted ascending")
    base = config or SolverConfig(beta=1.0)
    points = []
    policy = None
    for beta in betas:
        cfg = SolverConfig(beta, base.eps_F, base.eps_pi, base.max_iters, base.prior_floor)
        try:
            result = solve(mdp, cfg, init_policy=policy)
        except NoConvergenceError as exc:
            raise NoConvergenceError(f"trade-off sweep failed at beta={beta:g}: {exc}",
                                     exc.result, exc.residuals) from exc
        except (NonAbsorbingError, NumericalUnderflowError) as exc:
            raise type(exc)(f"trade-off sweep failed at beta={beta:g}: {exc}") from exc
        policy = result.policy
        points.append(TradeoffPoint(beta, float(result.value.mean()),
                                    float(result.decision_information.mean()), result.converged))
    return points


def policy_support(mdp: Mdp, policy, start: int) -> frozenset:
    """States reached with positive probability from ``start``, ``start`` included."""
    kernel = np.einsum("sa,ast->st", check_policy(mdp, policy), mdp.transition) > 0
    seen = {int(start)}
    frontier = [int(start)]
    while frontier:
        s = frontier.pop()
        for t in np.flatnonzero(kernel[s]):
            if int(t) not in seen:
                seen.add(int(t))
                frontier.append(int(t))
    return frozenset(seen)


def compose_policies(pi1, support1, pi2, support2) -> np.ndarray:
    """Glue two sub-policies that meet only at their shared subgoal.

    Rows in ``support1`` minus the subgoal come from ``pi1``; every other
    row (``support2`` and states outside both supports) comes from ``pi2``.
    """
    pi1 = np.asarray(pi1, dtype=float)
    pi2 = np.asarray(pi2, dtype=float)
    if pi1.shape != pi2.shape:
        raise ValueError(f"policy shapes differ: {pi1.shape} vs {pi2.shape}")
    s1, s2 = set(map(int, support1)), set(map(int, support2))
    shared = s1 & s2
    if len(shared) > 1:
        raise OverlappingSupportsError(f"supports share {sorted(shared)}; expected only the subgoal")
    composite = pi2.copy()
    rows = sorted(s1 - shared)
    composite[rows] = pi1[rows]
    return composite
