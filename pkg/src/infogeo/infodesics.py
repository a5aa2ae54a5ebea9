"""Value geodesics, epsilon-infodesics and triangle-violation scans.

Every function here reads a shared all-pairs matrix D with D[i, j] the
distance (or free energy) from state i to goal j. A sequence
<s0, ..., sN> is scored by

    deviation = (sum_i D[s_i, s_i+1] - D[s0, sN]) / D[s0, sN]

so a negative deviation means splitting the trip at subgoals is cheaper
than the direct solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from infogeo.distances import DistanceMatrix
from infogeo.errors import MissingPairEntryError

GEODESIC_TOL = 1e-9
VIOLATION_TOL = 1e-6
MAX_LEN = 5


def _as_matrix(D) -> DistanceMatrix:
    return D if isinstance(D, DistanceMatrix) else DistanceMatrix.from_array(D)


def find_value_geodesics(V, s: int, g: int, tol: float = GEODESIC_TOL) -> frozenset:
    """States s' with d(s, g) = d(s, s') + d(s', g), endpoints included.

    ``V`` holds -V* for every goal, e.g. from ``value_distances``.
    """
    d = _as_matrix(V)
    d.require_complete("value geodesics")
    d = d.values
    if s == g:
        return frozenset({int(s)})
    through = d[s, :] + d[:, g]
    return frozenset(int(x) for x in np.flatnonzero(np.abs(through - d[s, g]) <= tol))


@dataclass(frozen=True)
class Infodesic:
    sequence: tuple
    segments: tuple
    direct: float
    deviation: float

    def to_dict(self) -> dict:
        return {
            "seq": list(self.sequence),
            "segments": list(self.segments),
            "direct": self.direct,
            "deviation": self.deviation,
        }


def _check_sequence(seq, n):
    seq = tuple(int(x) for x in seq)
    if not 2 <= len(seq) <= MAX_LEN:
        raise ValueError(f"sequence length must be between 2 and {MAX_LEN}, got {len(seq)}")
    if len(set(seq)) != len(seq):
        raise ValueError(f"sequence {seq} repeats a state")
    if min(seq) < 0 or max(seq) >= n:
        raise ValueError(f"sequence {seq} has a state out of range")
    return seq


def sequence_deviation(D, seq: Sequence[int]) -> Infodesic:
    """Score one sequence; only the entries it touches need to exist."""
    D = _as_matrix(D)
    seq = _check_sequence(seq, D.n)
    segments = tuple(D.entry(a, b) for a, b in zip(seq, seq[1:]))
    direct = D.entry(seq[0], seq[-1])
    if len(seq) == 2:
        deviation = 0.0
    else:
        deviation = (sum(segments) - direct) / direct
    return Infodesic(seq, segments, direct, float(deviation))


def _require(D: DistanceMatrix, rows, cols):
    sub_ok = D.converged[np.ix_(rows, cols)] & np.isfinite(D.values[np.ix_(rows, cols)])
    if not np.all(sub_ok):
        i, j = np.argwhere(~sub_ok)[0]
        raise MissingPairEntryError(
            f"no converged free energy for pair ({rows[i]} -> {cols[j]})"
        )


def _interior_costs(d, s, g, interior, k):
    """Summed segment cost over all k-tuples of interior states, shape (m,)*k.

    Tuples that repeat a state are set to NaN.
    """
    m = len(interior)
    first = d[s, interior]
    last = d[interior, g]
    inner = d[np.ix_(interior, interior)]
    if k == 1:
        return first + last
    cost = first.reshape((m,) + (1,) * (k - 1))
    for step in range(k - 1):
        shape = [1] * k
        shape[step] = shape[step + 1] = m
        cost = cost + inner.reshape(shape)
    cost = cost + last.reshape((1,) * (k - 1) + (m,))
    idx = np.indices((m,) * k)
    repeat = np.zeros((m,) * k, dtype=bool)
    for a in range(k):
        for b in range(a + 1, k):
            repeat |= idx[a] == idx[b]
    return np.where(repeat, np.nan, cost)


def _monotone_mask(d, g, interior, k, start_value):
    """Strict decrease of d[., g] along s, interior..., g for every tuple."""
    m = len(interior)
    to_goal = d[interior, g]
    ok = np.ones((m,) * k, dtype=bool)
    prev = np.full((m,) * k, start_value)
    for step in range(k):
        shape = [1] * k
        shape[step] = m
        cur = to_goal.reshape(shape)
        ok &= prev > cur
        prev = np.broadcast_to(cur, (m,) * k)
    return ok & (prev > 0.0)


def enumerate_epsilon_infodesics(
    D,
    s: int,
    g: int,
    epsilon: float,
    max_len: int = 3,
    require_monotone: bool = True,
) -> list:
    """Every sequence s, interior..., g of 3 to ``max_len`` states with |deviation| < epsilon.

    Interior states are any non-repeating states other than s and g; they
    need not be grid neighbours. With ``require_monotone`` a sequence is
    accepted only if the direct distance to g strictly decreases along it.
    Results are ordered by |deviation|, then lexicographically.
    """
    D = _as_matrix(D)
    if not 3 <= max_len <= MAX_LEN:
        raise ValueError(f"max_len must be between 3 and {MAX_LEN}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    if s == g:
        raise ValueError("start and goal must differ")
    n = D.n
    interior = np.array([x for x in range(n) if x not in (s, g)], dtype=int)
    if interior.size == 0:
        return []
    _require(D, [s], [g] + list(interior))
    _require(D, list(interior), [g])
    if max_len >= 4:
        _require(D, list(interior), list(interior))
    d = D.values
    direct = d[s, g]
    found = []
    for k in range(1, max_len - 1):
        if k > interior.size:
            break
        total = _interior_costs(d, s, g, interior, k)
        with np.errstate(invalid="ignore"):
            dev = (total - direct) / direct
            accept = (dev > -epsilon) & (dev < epsilon)
        if require_monotone:
            accept &= _monotone_mask(d, g, interior, k, direct)
        for tup in np.argwhere(accept):
            seq = (s,) + tuple(int(interior[t]) for t in tup) + (g,)
            segments = tuple(float(d[a, b]) for a, b in zip(seq, seq[1:]))
            found.append(Infodesic(seq, segments, float(direct), float(dev[tuple(tup)])))
    found.sort(key=lambda inf: (abs(inf.deviation), inf.sequence))
    return found


def _triple_deviations(D: DistanceMatrix) -> np.ndarray:
    """dev[s, y, g] for every ordered triple; NaN where states coincide."""
    D.require_complete("all-pairs scans")
    d = D.values
    n = D.n
    direct = d[:, None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        dev = (d[:, :, None] + d[None, :, :] - direct) / direct
    idx = np.arange(n)
    dev[idx, idx, :] = np.nan
    dev[:, idx, idx] = np.nan
    dev[idx, :, idx] = np.nan
    return dev


@dataclass(frozen=True, eq=False)
class InterimHistogram:
    """How often each state is the middle of an accepted <s, s', g>, over ordered pairs."""

    counts: np.ndarray
    epsilon: float
    pairs: int

    def argmax_states(self) -> tuple:
        top = self.counts.max()
        return tuple(int(x) for x in np.flatnonzero(self.counts == top))


def interim_histogram(D, epsilon: float, require_monotone: bool = True) -> InterimHistogram:
    D = _as_matrix(D)
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    dev = _triple_deviations(D)
    with np.errstate(invalid="ignore"):
        accept = (dev > -epsilon) & (dev < epsilon)
    if require_monotone:
        to_goal = D.values  # to_goal[x, g]
        accept &= to_goal[:, None, :] > to_goal[None, :, :]
        accept &= to_goal[None, :, :] > 0
    counts = accept.sum(axis=(0, 2)).astype(int)
    n = D.n
    return InterimHistogram(counts, float(epsilon), n * (n - 1))


class TriangleViolation(NamedTuple):
    start: int
    via: int
    goal: int
    deviation: float


def scan_triangle_violations(D, tol: float = VIOLATION_TOL) -> list:
    """Triples where stopping at ``via`` beats the direct solve, most negative first."""
    D = _as_matrix(D)
    dev = _triple_deviations(D)
    with np.errstate(invalid="ignore"):
        hits = np.argwhere(dev < -tol)
    out = [TriangleViolation(int(s), int(y), int(g), float(dev[s, y, g])) for s, y, g in hits]
    out.sort(key=lambda v: (v.deviation, v.start, v.via, v.goal))
    return out
