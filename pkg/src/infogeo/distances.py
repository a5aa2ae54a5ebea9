"""Pairwise distance matrix container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from infogeo.errors import MissingPairEntryError
from infogeo.mdp import GridSpec


@dataclass(frozen=True, eq=False)
class DistanceMatrix:
    """All-pairs distances with d[i, j] = distance from state i to goal j.

    Column j comes from the solve with goal j. Entries whose solve is
    missing are NaN; ``converged[i, j]`` is False for missing or
    unconverged entries.
    """

    values: np.ndarray
    converged: np.ndarray
    beta: Optional[float] = None
    spec: Optional[GridSpec] = None
    results: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def entry(self, i: int, j: int) -> float:
        """Checked access: raises if the (i, j) entry is unusable."""
        if not self.converged[i, j] or not np.isfinite(self.values[i, j]):
            raise MissingPairEntryError(f"no converged free energy for pair ({i} -> {j})")
        return float(self.values[i, j])

    def require_complete(self, what: str = "this operation") -> None:
        bad = ~self.converged | ~np.isfinite(self.values)
        if np.any(bad):
            i, j = np.argwhere(bad)[0]
            raise MissingPairEntryError(
                f"{what} needs every pairwise entry; ({i} -> {j}) is missing or unconverged"
            )

    @classmethod
    def from_array(cls, values, beta=None, spec=None) -> "DistanceMatrix":
        values = np.array(values, dtype=float)
        if values.ndim != 2 or values.shape[0] != values.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {values.shape}")
        return cls(values, np.isfinite(values), beta, spec)
