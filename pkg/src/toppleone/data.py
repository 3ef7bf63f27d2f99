"""Sample container shared by the distribution and objective code."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True, eq=False)
class SortedSample:
    """Ascending nonnegative observations x_(1) <= ... <= x_(n).

    Ties are permitted; every objective below is defined on order
    statistics, so the ordering invariant is enforced at construction
    and the stored array is read-only.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 1 or v.size < 1:
            raise ValueError("sample must be a nonempty 1-d array")
        if not np.all(np.isfinite(v)):
            raise ValueError("sample values must be finite")
        if v[0] < 0.0:
            raise ValueError("sample values must be nonnegative")
        if np.any(np.diff(v) < 0.0):
            raise ValueError("sample values must be sorted ascending")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, values) -> "SortedSample":
        """Build a SortedSample from observations in arbitrary order."""
        return cls(np.sort(np.asarray(values, dtype=np.float64)))

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __len__(self) -> int:
        return self.n
