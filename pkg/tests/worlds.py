"""Small hand-built MDPs shared by the tests."""

import numpy as np

from infogeo import Mdp


def corridor_mdp(n: int, goal: int, slip: float = 0.0) -> Mdp:
    """1D corridor with actions (left, right); ``slip`` moves the other way."""
    t = np.zeros((2, n, n))
    for s in range(n):
        for a, step in enumerate((-1, 1)):
            if s == goal:
                t[a, s, s] = 1.0
                continue
            main = min(max(s + step, 0), n - 1)
            other = min(max(s - step, 0), n - 1)
            t[a, s, main] += 1.0 - slip
            t[a, s, other] += slip
    r = np.full_like(t, -1.0)
    r[:, goal, :] = 0.0
    return Mdp(t, r, goal)


def ring_mdp(n: int, goal: int) -> Mdp:
    """One-way ring with actions (stay, forward); the last state wraps to 0."""
    t = np.zeros((2, n, n))
    for s in range(n):
        if s == goal:
            t[:, s, s] = 1.0
            continue
        t[0, s, s] = 1.0
        t[1, s, (s + 1) % n] = 1.0
    r = np.full_like(t, -1.0)
    r[:, goal, :] = 0.0
    return Mdp(t, r, goal)


def random_mdp(n: int, n_actions: int, goal: int, seed: int) -> Mdp:
    """Dense stochastic cost-only MDP; every row keeps mass on the goal."""
    rng = np.random.default_rng(seed)
    t = rng.random((n_actions, n, n)) + 0.05
    t[:, :, goal] += 0.2
    t /= t.sum(axis=2, keepdims=True)
    t[:, goal, :] = 0.0
    t[:, goal, goal] = 1.0
    r = np.full_like(t, -1.0)
    r[:, goal, :] = 0.0
    return Mdp(t, r, goal)
