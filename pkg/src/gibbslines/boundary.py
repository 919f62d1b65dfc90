"""Boundary data for conditioned bridge systems.

An instance fixes the interval [a, b], the decreasing entrance and exit
lists, and an optional floor curve that the lowest line must stay above
(floor=None means no floor).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bridge import GridPath

__all__ = ["BoundaryData", "constant_floor"]


@dataclass(frozen=True)
class BoundaryData:
    a: float
    b: float
    entrance: np.ndarray
    exit: np.ndarray
    floor: GridPath | None = None

    def __post_init__(self):
        x = np.asarray(self.entrance, dtype=float)
        y = np.asarray(self.exit, dtype=float)
        object.__setattr__(self, "entrance", x)
        object.__setattr__(self, "exit", y)
        if not self.a < self.b:
            raise ValueError("need a < b")
        if x.ndim != 1 or y.ndim != 1 or x.size != y.size or x.size == 0:
            raise ValueError("entrance and exit must be equal-length nonempty lists")
        if x.size > 1 and not (np.all(np.diff(x) < 0) and np.all(np.diff(y) < 0)):
            raise ValueError("entrance and exit lists must be strictly decreasing")
        if self.floor is not None:
            f = self.floor
            if f.t_start > self.a + 1e-12 or f.t_end < self.b - 1e-12:
                raise ValueError("floor grid must cover [a, b]")
            if not x[-1] > float(f.value_at(self.a)):
                raise ValueError("lowest entrance value must lie above the floor at a")
            if not y[-1] > float(f.value_at(self.b)):
                raise ValueError("lowest exit value must lie above the floor at b")

    @property
    def k(self) -> int:
        return self.entrance.size

    def floor_at(self, times) -> np.ndarray:
        """Floor values at the given times, -inf when there is no floor."""
        t = np.asarray(times, dtype=float)
        if self.floor is None:
            return np.full(t.shape, -np.inf)
        return self.floor.value_at(t)


def constant_floor(a: float, b: float, value: float) -> GridPath:
    return GridPath(a, b, np.array([value, value]))
