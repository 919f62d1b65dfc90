"""Brownian bridge sampling on uniform grids, plus closed-form bridge laws.

A bridge between (t_start, x) and (t_end, y) is filled in by recursive
midpoint bisection: the value at the midpoint of a segment, given the
segment endpoints, is Gaussian with the affine-interpolation mean and
variance diffusion * (t_mid - t_lo) * (t_hi - t_mid) / (t_hi - t_lo).
Descending into the two sub-segments yields the exact finite-dimensional
bridge law restricted to the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rng import as_generator

__all__ = [
    "GridPath",
    "sample_bridge",
    "sample_bridges",
    "refine_bridge",
    "bridge_max_law",
    "stay_positive_upper_bound",
    "modulus_of_continuity",
]


@dataclass(frozen=True)
class GridPath:
    """One continuous curve sampled on a uniform time grid.

    values[j] is the curve at time t_start + j * (t_end - t_start) / m,
    where m = len(values) - 1.
    """

    t_start: float
    t_end: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if not self.t_start < self.t_end:
            raise ValueError("need t_start < t_end")
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("need at least two grid values (m >= 1)")
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")

    @property
    def m(self) -> int:
        return self.values.size - 1

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.m

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.values.size)

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        """Grid index of time t; t must sit on the grid (within tol)."""
        pos = (t - self.t_start) / self.dt
        j = int(round(pos))
        if j < 0 or j > self.m or abs(pos - j) > tol:
            raise ValueError(f"time {t} is not a grid point")
        return j

    def value_at(self, t) -> np.ndarray:
        """Linear interpolation between grid points."""
        return np.interp(t, self.times(), self.values)


def _fill_midpoints(vals: np.ndarray, times: np.ndarray, diffusion: float, gen) -> None:
    """Fill interior columns of vals (replicas x (m+1)) given endpoint columns."""
    m = times.size - 1
    nrep = vals.shape[0]
    stack = [(0, m)]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        mid = (lo + hi) // 2
        t_lo, t_mid, t_hi = times[lo], times[mid], times[hi]
        frac = (t_mid - t_lo) / (t_hi - t_lo)
        sd = math.sqrt(diffusion * (t_mid - t_lo) * (t_hi - t_mid) / (t_hi - t_lo))
        mean = vals[:, lo] + frac * (vals[:, hi] - vals[:, lo])
        vals[:, mid] = mean + sd * gen.standard_normal(nrep)
        stack.append((lo, mid))
        stack.append((mid, hi))


def _check_bridge_args(t_start, t_end, m, diffusion):
    if not t_end > t_start:
        raise ValueError("need t_start < t_end")
    if m < 1:
        raise ValueError("need at least one grid step (m >= 1)")
    if not diffusion > 0:
        raise ValueError("diffusion parameter must be positive")


def sample_bridges(
    t_start: float,
    t_end: float,
    x: float,
    y: float,
    m: int,
    replicas: int,
    rng,
    diffusion: float = 1.0,
) -> np.ndarray:
    """Sample independent bridges from (t_start, x) to (t_end, y).

    Returns a (replicas, m+1) array; row r is one bridge on the uniform
    grid.  Endpoints are pinned exactly.
    """
    _check_bridge_args(t_start, t_end, m, diffusion)
    if replicas < 1:
        raise ValueError("need replicas >= 1")
    gen = as_generator(rng)
    times = np.linspace(t_start, t_end, m + 1)
    vals = np.empty((replicas, m + 1), dtype=float)
    vals[:, 0] = x
    vals[:, m] = y
    _fill_midpoints(vals, times, diffusion, gen)
    return vals


def sample_bridge(
    t_start: float,
    t_end: float,
    x: float,
    y: float,
    m: int,
    rng,
    diffusion: float = 1.0,
) -> GridPath:
    """Sample one bridge from (t_start, x) to (t_end, y) on m grid steps."""
    vals = sample_bridges(t_start, t_end, x, y, m, 1, rng, diffusion=diffusion)
    return GridPath(t_start, t_end, vals[0])


def refine_bridge(path: GridPath, rng, diffusion: float = 1.0) -> GridPath:
    """Conditionally refine a bridge from m to 2m grid steps.

    Each new midpoint is drawn from its bridge law given the two flanking
    grid values, so refine(sample at m) has the same law as sampling at 2m
    directly.
    """
    if not diffusion > 0:
        raise ValueError("diffusion parameter must be positive")
    gen = as_generator(rng)
    old = path.values
    m = path.m
    half = path.dt / 2.0
    fine = np.empty(2 * m + 1, dtype=float)
    fine[0::2] = old
    mean = 0.5 * (old[:-1] + old[1:])
    sd = math.sqrt(diffusion * half / 2.0)
    fine[1::2] = mean + sd * gen.standard_normal(m)
    return GridPath(path.t_start, path.t_end, fine)


def bridge_max_law(r: float, T: float) -> float:
    """P(sup of a standard bridge on [0, T] exceeds r) = exp(-2 r^2 / T)."""
    if not r > 0:
        raise ValueError("threshold r must be positive")
    if not T > 0:
        raise ValueError("interval length T must be positive")
    return math.exp(-2.0 * r * r / T)


def stay_positive_upper_bound(delta: float, M: float) -> float:
    """Upper bound on P(bridge from delta to M on [0, 1] stays positive).

    Equals min(1, 4 * sqrt(2/pi) * sqrt(delta * M)).
    """
    if not delta > 0 or not M > 0:
        raise ValueError("delta and M must both be positive")
    return min(1.0, 4.0 * math.sqrt(2.0 / math.pi) * math.sqrt(delta * M))


def modulus_of_continuity(paths, r: float) -> float:
    """Largest |f_i(s) - f_i(t)| over lines i and grid pairs with |s-t| < r.

    All paths must share one grid; only grid times enter the supremum.
    """
    if not paths:
        raise ValueError("need at least one path")
    first = paths[0]
    for p in paths[1:]:
        if (p.t_start, p.t_end, p.m) != (first.t_start, first.t_end, first.m):
            raise ValueError("paths must share a common grid")
    span = first.t_end - first.t_start
    if not 0 < r <= span:
        raise ValueError("need 0 < r <= grid span")
    dt = first.dt
    # strict |s - t| < r: grid offsets d with d * dt < r
    max_off = min(first.m, int(math.floor((r - 1e-12 * span) / dt)))
    best = 0.0
    stacked = np.vstack([p.values for p in paths])
    for d in range(1, max_off + 1):
        diff = np.abs(stacked[:, d:] - stacked[:, :-d])
        best = max(best, float(diff.max()))
    return best
