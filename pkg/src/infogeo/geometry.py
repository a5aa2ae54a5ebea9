"""All-pairs free-energy matrices, symmetrisation and metric MDS."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from infogeo.distances import DistanceMatrix
from infogeo.errors import NoConvergenceError
from infogeo.mdp import GridSpec, build_gridworld
from infogeo.solver import SolverConfig, solve


def _solve_goal(args):
    spec, goal, config = args
    mdp = build_gridworld(spec.with_goal(goal))
    try:
        result = solve(mdp, config)
    except NoConvergenceError as exc:
        return goal, None, exc.result
    return goal, result.free_energy, result


def pairwise_free_energy(
    spec: GridSpec,
    beta: float,
    config: Optional[SolverConfig] = None,
    goals: Optional[Iterable[int]] = None,
    jobs: int = 1,
) -> DistanceMatrix:
    """Column g holds F_g(s) for every start s, one solve per goal.

    ``goals`` restricts the solves to a subset; the other columns stay NaN
    and unconverged. Unconverged solves also leave NaN in their column, with
    the last iterate kept in ``results``. The assembly order does not depend
    on ``jobs``.
    """
    if config is None:
        config = SolverConfig(beta)
    elif config.beta != beta:
        config = SolverConfig(beta, config.eps_F, config.eps_pi, config.max_iters, config.prior_floor)
    n = spec.n_states
    goals = list(range(n)) if goals is None else sorted(set(int(g) for g in goals))
    for g in goals:
        if not 0 <= g < n:
            raise ValueError(f"goal {g} out of range")
    values = np.full((n, n), np.nan)
    converged = np.zeros((n, n), dtype=bool)
    tasks = [(spec, g, config) for g in goals]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            outputs = list(pool.map(_solve_goal, tasks))
    else:
        outputs = [_solve_goal(t) for t in tasks]
    results = {}
    for goal, column, result in outputs:
        results[goal] = result
        if column is not None:
            values[:, goal] = column
            converged[:, goal] = True
    return DistanceMatrix(values, converged, float(beta), spec, results)


def default_jobs() -> int:
    env = os.environ.get("INFOGEO_JOBS")
    if env:
        return max(1, int(env))
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def symmetrize(D) -> DistanceMatrix:
    """(D + D^T) / 2; an entry is converged only if both directions are."""
    if not isinstance(D, DistanceMatrix):
        D = DistanceMatrix.from_array(D)
    values = 0.5 * (D.values + D.values.T)
    return DistanceMatrix(values, D.converged & D.converged.T, D.beta, D.spec)


@dataclass(frozen=True)
class AsymmetryTable:
    """(d_ij - dsym_ij) / dsym_ij; ``undefined`` marks off-diagonal zero denominators."""

    values: np.ndarray
    undefined: np.ndarray


def asymmetry_proportion(D) -> AsymmetryTable:
    if not isinstance(D, DistanceMatrix):
        D = DistanceMatrix.from_array(D)
    sym = symmetrize(D).values
    n = D.n
    off = ~np.eye(n, dtype=bool)
    undefined = off & (sym == 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        table = np.where(undefined, np.nan, (D.values - sym) / sym)
    table[~off] = 0.0
    return AsymmetryTable(table, undefined)


def corner_contraction(D_sym: DistanceMatrix, corner: int = 0) -> float:
    """d(corner, opposite corner) / d(corner, centre) on an odd-sided square grid."""
    spec = D_sym.spec
    if spec is None or spec.width != spec.height or spec.width % 2 == 0:
        raise ValueError("corner contraction needs an odd-sided square grid")
    corners = spec.corners()
    opposite = corners[3 - corners.index(corner)]
    centre = spec.n_states // 2
    return D_sym.entry(corner, opposite) / D_sym.entry(corner, centre)


@dataclass(frozen=True, eq=False)
class Embedding:
    coords: np.ndarray
    stress: float
    iterations: int
    seed: int
    stress_history: tuple = field(default=(), repr=False)
    total_sq: float = 0.0

    @property
    def dims(self) -> int:
        return self.coords.shape[1]

    @property
    def normalized_stress(self) -> float:
        """Raw stress divided by the sum of squared target distances."""
        return float(self.stress / self.total_sq) if self.total_sq > 0 else 0.0

    @property
    def stress1(self) -> float:
        """Kruskal stress-1, the square root of ``normalized_stress``."""
        return float(np.sqrt(self.normalized_stress))

    def to_dict(self) -> dict:
        return {
            "dims": self.dims,
            "seed": int(self.seed),
            "stress": float(self.stress),
            "normalized_stress": self.normalized_stress,
            "iterations": int(self.iterations),
            "coords": self.coords.tolist(),
        }


def _pair_distances(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def raw_stress(target, X) -> float:
    iu = np.triu_indices(target.shape[0], 1)
    return float(np.sum((target[iu] - _pair_distances(X)[iu]) ** 2))


def _smacof_run(target, X, max_iter, tol):
    n = target.shape[0]
    history = [raw_stress(target, X)]
    iterations = 0
    for iterations in range(1, max_iter + 1):
        dist = _pair_distances(X)
        with np.errstate(divide="ignore", invalid="ignore"):
            B = np.where(dist > 0, -target / dist, 0.0)
        np.fill_diagonal(B, 0.0)
        np.fill_diagonal(B, -B.sum(axis=1))
        X = B @ X / n
        history.append(raw_stress(target, X))
        prev, cur = history[-2], history[-1]
        if cur <= 1e-15 or (prev - cur) <= tol * prev:
            break
    return X, history, iterations


def canonicalize(X) -> np.ndarray:
    """Centre, rotate onto principal axes, then fix each axis's sign.

    The sign of each axis is chosen so that the first point with a
    non-negligible coordinate on it is positive.
    """
    X = X - X.mean(axis=0)
    _, vecs = np.linalg.eigh(X.T @ X)
    X = X @ vecs[:, ::-1]
    for k in range(X.shape[1]):
        nz = np.flatnonzero(np.abs(X[:, k]) > 1e-12)
        if nz.size and X[nz[0], k] < 0:
            X[:, k] = -X[:, k]
    X -= X.mean(axis=0)
    return X


def mds_embed(D_sym, dims: int = 2, seed: int = 0, restarts: int = 8, max_iter: int = 300,
              tol: float = 1e-7) -> Embedding:
    """Metric SMACOF with seeded random restarts; keeps the lowest-stress run."""
    if dims not in (2, 3):
        raise ValueError("dims must be 2 or 3")
    if restarts < 1 or max_iter < 1:
        raise ValueError("restarts and max_iter must be at least 1")
    if isinstance(D_sym, DistanceMatrix):
        D_sym.require_complete("embedding")
        target = D_sym.values
    else:
        target = np.asarray(D_sym, dtype=float)
    if target.ndim != 2 or target.shape[0] != target.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(target, target.T, rtol=0, atol=1e-9):
        raise ValueError("embedding needs a symmetric matrix; symmetrize first")
    if np.any(np.abs(np.diag(target)) > 1e-9):
        raise ValueError("embedding needs a zero diagonal")
    target = 0.5 * (target + target.T)
    np.fill_diagonal(target, 0.0)
    n = target.shape[0]
    iu = np.triu_indices(n, 1)
    total_sq = float(np.sum(target[iu] ** 2))
    scale = np.sqrt(total_sq / max(len(iu[0]), 1)) or 1.0

    best = None
    for index, child in enumerate(np.random.SeedSequence(seed).spawn(restarts)):
        rng = np.random.default_rng(child)
        X0 = rng.standard_normal((n, dims)) * scale
        X, history, iterations = _smacof_run(target, X0, max_iter, tol)
        key = (history[-1], index)
        if best is None or key < best[0]:
            best = (key, X, history, iterations)
    _, X, history, iterations = best
    X = canonicalize(X)
    return Embedding(X, raw_stress(target, X), iterations, seed, tuple(history), total_sq)
