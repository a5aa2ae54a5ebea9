"""Finite cost-only MDPs and gridworld construction.

States of a gridworld are numbered row-major from the top-left cell:
index = row * width + col, so on a 5x5 grid the centre (2, 2) is state 12
and on a 7x7 grid the top-right corner is state 6.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

ROW_TOL = 1e-12

# (d_row, d_col) per action; row 0 is the top edge.
MANHATTAN_MOVES = (("N", -1, 0), ("E", 0, 1), ("S", 1, 0), ("W", 0, -1))
MOORE_MOVES = (
    ("N", -1, 0),
    ("NE", -1, 1),
    ("E", 0, 1),
    ("SE", 1, 1),
    ("S", 1, 0),
    ("SW", 1, -1),
    ("W", 0, -1),
    ("NW", -1, -1),
)
NEIGHBORHOODS = {"manhattan": MANHATTAN_MOVES, "moore": MOORE_MOVES}


@dataclass(frozen=True)
class GridSpec:
    """Rectangular gridworld with a single absorbing goal."""

    width: int
    height: int
    neighborhood: str = "manhattan"
    goal: int = 0

    def __post_init__(self):
        if int(self.width) < 1 or int(self.height) < 1:
            raise ValueError("grid dimensions must be positive")
        if self.neighborhood not in NEIGHBORHOODS:
            raise ValueError(
                f"neighborhood must be one of {sorted(NEIGHBORHOODS)}, got {self.neighborhood!r}"
            )
        if not 0 <= int(self.goal) < self.n_states:
            raise ValueError("goal out of range")

    @property
    def n_states(self) -> int:
        return self.width * self.height

    @property
    def n_actions(self) -> int:
        return len(NEIGHBORHOODS[self.neighborhood])

    @property
    def action_names(self) -> tuple[str, ...]:
        return tuple(name for name, _, _ in NEIGHBORHOODS[self.neighborhood])

    def with_goal(self, goal: int) -> "GridSpec":
        return GridSpec(self.width, self.height, self.neighborhood, goal)

    def corners(self) -> tuple[int, int, int, int]:
        w, h = self.width, self.height
        return (0, w - 1, (h - 1) * w, h * w - 1)


@dataclass(frozen=True, eq=False)
class Mdp:
    """Finite MDP with one absorbing goal.

    ``transition[a, s, s2]`` is p(s2 | s, a) and ``reward[a, s, s2]`` is
    r(s2, s, a). Both arrays are made read-only on construction.
    """

    transition: np.ndarray
    reward: np.ndarray
    goal: int
    spec: Optional[GridSpec] = field(default=None, compare=False)

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        r = np.array(self.reward, dtype=float)
        if t.ndim != 3 or t.shape[1] != t.shape[2]:
            raise ValueError("transition must have shape (n_actions, n_states, n_states)")
        if r.shape != t.shape:
            raise ValueError("reward must have the same shape as transition")
        if np.any(t < 0) or np.any(np.abs(t.sum(axis=2) - 1.0) > ROW_TOL):
            raise ValueError("transition rows must be probability distributions")
        n = t.shape[1]
        if not 0 <= int(self.goal) < n:
            raise ValueError("goal out of range")
        g = int(self.goal)
        if np.any(t[:, g, g] != 1.0):
            raise ValueError("goal must be absorbing")
        if np.any(r[:, g, g] != 0.0):
            raise ValueError("goal self-transition must carry zero reward")
        t.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "transition", t)
        object.__setattr__(self, "reward", r)
        object.__setattr__(self, "goal", g)

    @property
    def n_states(self) -> int:
        return self.transition.shape[1]

    @property
    def n_actions(self) -> int:
        return self.transition.shape[0]

    @property
    def transient(self) -> np.ndarray:
        """Indices of all non-goal states, ascending."""
        return np.delete(np.arange(self.n_states), self.goal)

    def expected_reward(self) -> np.ndarray:
        """Expected immediate reward, shape (n_states, n_actions)."""
        return np.einsum("ast,ast->sa", self.transition, self.reward)

    def is_cost_only(self) -> bool:
        """True when every transient transition costs exactly one unit."""
        mask = np.ones(self.n_states, dtype=bool)
        mask[self.goal] = False
        support = self.transition[:, mask, :] > 0
        return bool(np.all(self.reward[:, mask, :][support] == -1.0))

    def with_goal(self, goal: int) -> "Mdp":
        """Same dynamics with a different absorbing goal (gridworlds only)."""
        if self.spec is None:
            raise ValueError("with_goal needs a gridworld-built Mdp")
        return build_gridworld(self.spec.with_goal(goal))


def state_index(row: int, col: int, spec: GridSpec) -> int:
    if not (0 <= row < spec.height and 0 <= col < spec.width):
        raise ValueError(f"cell ({row}, {col}) outside {spec.width}x{spec.height} grid")
    return row * spec.width + col


def state_coords(index: int, spec: GridSpec) -> tuple[int, int]:
    if not 0 <= index < spec.n_states:
        raise ValueError(f"state {index} outside {spec.width}x{spec.height} grid")
    return divmod(int(index), spec.width)


def build_gridworld(spec: GridSpec) -> Mdp:
    """Deterministic gridworld: off-grid moves bump into the wall and stay put.

    Every step from a transient state costs -1 (bumps included); the goal
    self-loops at zero reward.
    """
    moves = NEIGHBORHOODS[spec.neighborhood]
    n, n_actions = spec.n_states, len(moves)
    transition = np.zeros((n_actions, n, n))
    reward = np.full((n_actions, n, n), -1.0)
    for s in range(n):
        row, col = divmod(s, spec.width)
        for a, (_, dr, dc) in enumerate(moves):
            if s == spec.goal:
                nxt = s
            else:
                r2, c2 = row + dr, col + dc
                inside = 0 <= r2 < spec.height and 0 <= c2 < spec.width
                nxt = r2 * spec.width + c2 if inside else s
            transition[a, s, nxt] = 1.0
    reward[:, spec.goal, :] = 0.0
    return Mdp(transition, reward, spec.goal, spec)


def next_states(mdp: Mdp) -> np.ndarray:
    """Successor table (n_actions, n_states) for deterministic MDPs."""
    nxt = mdp.transition.argmax(axis=2)
    if not np.all(np.take_along_axis(mdp.transition, nxt[..., None], axis=2) == 1.0):
        raise ValueError("MDP transitions are not deterministic")
    return nxt
