"""Undiscounted value iteration and quasimetric checks."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from infogeo.distances import DistanceMatrix
from infogeo.errors import NoConvergenceError
from infogeo.mdp import GridSpec, Mdp, build_gridworld

TIE_TOL = 1e-9


@dataclass(frozen=True)
class ValueFunction:
    values: np.ndarray
    iterations: int
    residual: float


def q_values(mdp: Mdp, values) -> np.ndarray:
    """Q(s, a) = sum_s' p(s'|s,a) [r(s',s,a) + V(s')], shape (n_states, n_actions)."""
    return mdp.expected_reward() + np.einsum("ast,t->sa", mdp.transition, values)


def optimal_action_sets(mdp: Mdp, values, tol: float = TIE_TOL) -> np.ndarray:
    """Boolean mask (n_states, n_actions) of actions attaining max Q within ``tol``."""
    q = q_values(mdp, values)
    return q >= q.max(axis=1, keepdims=True) - tol


def greedy_policy(mdp: Mdp, values, tol: float = TIE_TOL) -> np.ndarray:
    """Deterministic greedy policy; ties go to the lowest action index."""
    best = optimal_action_sets(mdp, values, tol).argmax(axis=1)
    policy = np.zeros((mdp.n_states, mdp.n_actions))
    policy[np.arange(mdp.n_states), best] = 1.0
    return policy


def value_iteration(mdp: Mdp, tol: float = 1e-9, max_sweeps: int | None = None):
    """Synchronous Bellman optimality sweeps from V = 0.

    Returns ``(ValueFunction, greedy_policy)``. On a connected cost-only
    grid the fixed point is integral and reached after diameter + 1 sweeps.
    """
    if max_sweeps is None:
        max_sweeps = 10 * mdp.n_states + 10
    values = np.zeros(mdp.n_states)
    residual = np.inf
    for sweep in range(1, max_sweeps + 1):
        new = q_values(mdp, values).max(axis=1)
        new[mdp.goal] = 0.0
        residual = float(np.max(np.abs(new - values)))
        values = new
        if residual <= tol:
            vf = ValueFunction(values, sweep, residual)
            return vf, greedy_policy(mdp, values)
    raise NoConvergenceError(
        f"value iteration did not converge in {max_sweeps} sweeps (residual {residual:.3g}); "
        "some state cannot reach the goal",
        residuals={"bellman": residual},
    )


def value_distances(spec: GridSpec) -> DistanceMatrix:
    """d[i, j] = -V*_j(i), one value iteration per goal j."""
    n = spec.n_states
    d = np.zeros((n, n))
    for g in range(n):
        vf, _ = value_iteration(build_gridworld(spec.with_goal(g)))
        d[:, g] = -vf.values
    return DistanceMatrix(d, np.ones((n, n), dtype=bool), None, spec)


@dataclass
class QuasimetricReport:
    """Violations of nonnegativity (D1), indiscernibles (D2) and triangle (D4).

    D4 triples are (x, y, z) with d(x, z) > d(x, y) + d(y, z) + tol and
    ``excess`` = d(x, z) - d(x, y) - d(y, z).
    """

    negative: list = field(default_factory=list)
    zero_off_diagonal: list = field(default_factory=list)
    triangle: list = field(default_factory=list)
    worst_triple: tuple | None = None
    worst_excess: float = 0.0
    # entries left out because they are missing or unconverged
    skipped: int = 0

    @property
    def ok(self) -> bool:
        return not (self.negative or self.zero_off_diagonal or self.triangle or self.skipped)

    def has_triangle_violation(self, x: int, y: int, z: int) -> bool:
        return any(t[:3] == (x, y, z) for t in self.triangle)


def check_quasimetric(distances, tol: float = 1e-9) -> QuasimetricReport:
    """Check D1, D2 and D4 exhaustively.

    Use ``tol=1e-6`` for iteratively solved free energies. Missing or
    unconverged entries take part in no check; their count is reported in
    ``skipped`` and makes ``ok`` false.
    """
    if isinstance(distances, DistanceMatrix):
        d = np.where(distances.converged, distances.values, np.nan)
    else:
        d = np.array(distances, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError(f"distance matrix must be square, got shape {d.shape}")
    n = d.shape[0]
    report = QuasimetricReport(skipped=int(np.sum(~np.isfinite(d))))
    off = ~np.eye(n, dtype=bool)
    for i, j in np.argwhere(d < -tol):
        report.negative.append((int(i), int(j), float(d[i, j])))
    for i, j in np.argwhere(off & (np.abs(d) <= tol)):
        report.zero_off_diagonal.append((int(i), int(j)))
    for y in range(n):
        # excess[x, z] for detours through y
        excess = d - (d[:, y][:, None] + d[y, :][None, :])
        for x, z in np.argwhere(excess > tol):
            e = float(excess[x, z])
            report.triangle.append((int(x), y, int(z), e))
            if e > report.worst_excess:
                report.worst_excess = e
                report.worst_triple = (int(x), y, int(z))
    return report
