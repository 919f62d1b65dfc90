"""Ordered line ensembles on a shared grid: construction and statistics.

Conditioned ensembles are produced by the lattice chain (an approximate
sampler whose stationary law is the conditioned walk-bridge law) restricted
to the requested grid.  Where the acceptance probability allows it, the
chain is started from an exact rejection sample, in which case the output
law is stationary from sweep zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lattice
from .boundary import BoundaryData
from .bridge import GridPath
from .rng import as_generator
from .stats import binom_ci

__all__ = [
    "LineEnsemble",
    "ensemble_from_lattice",
    "sample_nonintersecting",
    "sample_watermelon",
    "watermelon_boundary",
    "edge_scale",
    "edge_unscale",
    "parabolic_shift",
    "parabolic_unshift",
    "min_gap",
    "height_extremes",
    "hypothesis_h3_statistic",
]

SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class LineEnsemble:
    """k curves on one uniform grid; line 0 is the top line."""

    t_start: float
    t_end: float
    lines: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.lines, dtype=float)
        object.__setattr__(self, "lines", arr)
        if not self.t_start < self.t_end:
            raise ValueError("need t_start < t_end")
        if arr.ndim != 2 or arr.shape[1] < 2:
            raise ValueError("lines must be a k x (m+1) array with m >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("line values must be finite")

    @property
    def k(self) -> int:
        return self.lines.shape[0]

    @property
    def m(self) -> int:
        return self.lines.shape[1] - 1

    @property
    def dt(self) -> float:
        return (self.t_end - self.t_start) / self.m

    def times(self) -> np.ndarray:
        return np.linspace(self.t_start, self.t_end, self.m + 1)

    def line(self, i: int) -> GridPath:
        return GridPath(self.t_start, self.t_end, self.lines[i].copy())

    def index_of(self, t: float, tol: float = 1e-9) -> int:
        pos = (t - self.t_start) / self.dt
        j = int(round(pos))
        if j < 0 or j > self.m or abs(pos - j) > tol:
            raise ValueError(f"time {t} is not a grid point")
        return j

    def value_at(self, i: int, t) -> np.ndarray:
        return np.interp(t, self.times(), self.lines[i])

    def is_strictly_ordered(self) -> bool:
        if self.k < 2:
            return True
        return bool(np.all(self.lines[:-1] > self.lines[1:]))

    def with_line(self, i: int, path: GridPath) -> "LineEnsemble":
        if path.m != self.m or abs(path.t_start - self.t_start) > 1e-9 or abs(path.t_end - self.t_end) > 1e-9:
            raise ValueError("replacement line must live on the ensemble grid")
        lines = self.lines.copy()
        lines[i] = path.values
        return LineEnsemble(self.t_start, self.t_end, lines)


def ensemble_from_lattice(system: lattice.LatticeBridgeSystem, m: int) -> LineEnsemble:
    """Restrict a lattice system to a uniform m-step grid on [a, b].

    Grid values between lattice times come from the piecewise-linear walk
    path, so strict ordering is inherited from the lattice.
    """
    if m < 1:
        raise ValueError("need m >= 1")
    src_t = system.times()
    src_v = system.values()
    grid = np.linspace(system.a, system.b, m + 1)
    lines = np.vstack([np.interp(grid, src_t, src_v[i]) for i in range(system.k)])
    return LineEnsemble(system.a, system.b, lines)


def sample_nonintersecting(
    boundary: BoundaryData,
    m: int,
    n: int,
    sweeps: int,
    rng,
    init: str = "auto",
    rejection_budget: int = 500,
) -> LineEnsemble:
    """Approximate sample of k bridges conditioned on ordering and floor avoidance.

    init='rejection' starts the chain from an exact conditioned sample (the
    output is then stationary regardless of sweeps), init='lowest' from the
    pointwise-minimal configuration (sweeps act as burn-in), and 'auto'
    tries rejection within the budget before falling back.
    """
    gen = as_generator(rng)
    system = None
    if init not in ("auto", "rejection", "lowest"):
        raise ValueError("init must be 'auto', 'rejection' or 'lowest'")
    if init in ("auto", "rejection"):
        try:
            system, _ = lattice.sample_admissible_rejection(boundary, n, gen, rejection_budget)
        except lattice.RejectionLimitError:
            if init == "rejection":
                raise
    if system is None:
        system = lattice.lowest_initial_configuration(boundary, n)
    system = lattice.run_chain(system, sweeps, gen)
    ens = ensemble_from_lattice(system, m)
    if not ens.is_strictly_ordered():
        raise RuntimeError("sampler produced an unordered ensemble (this is a bug)")
    return ens


def watermelon_boundary(N: int, T_N: float, n: int) -> BoundaryData:
    """Entrance/exit lists -i * (2/n), the tightest lattice-representable pinning."""
    if N < 1:
        raise ValueError("need N >= 1")
    eps = 2.0 / n
    pins = -eps * np.arange(1, N + 1)
    return BoundaryData(-T_N, T_N, pins, pins, floor=None)


def sample_watermelon(N: int, T_N: float, m: int, n: int, sweeps: int, rng) -> LineEnsemble:
    """N strictly ordered bridges on [-T_N, T_N], all pinned just below 0.

    Pinning spacing is 2/n, the smallest the lattice represents; the chain
    starts from the lowest configuration, so sweeps must cover burn-in.
    """
    boundary = watermelon_boundary(N, T_N, n)
    gen = as_generator(rng)
    system = lattice.lowest_initial_configuration(boundary, n)
    system = lattice.run_chain(system, sweeps, gen)
    return ensemble_from_lattice(system, m)


def edge_scale(ens: LineEnsemble, N: int, window: float | None = None) -> LineEnsemble:
    """Zoom into the top edge: t maps to N^(-1/3) (B(N^(2/3) t) - sqrt(2) N).

    Output grid points are the source grid points inside the window scaled
    by N^(-2/3), so no interpolation error is introduced.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    h = float(N) ** (2.0 / 3.0)
    times = ens.times()
    if window is None:
        keep = np.ones(times.size, dtype=bool)
    else:
        span = window * h
        if ens.t_start > -span - 1e-9 or ens.t_end < span - 1e-9:
            raise ValueError("requested window exceeds the source grid")
        keep = np.abs(times) <= span + 1e-9
    idx = np.nonzero(keep)[0]
    if idx.size < 2:
        raise ValueError("window contains fewer than two grid points")
    scaled = (ens.lines[:, idx] - SQRT2 * N) / float(N) ** (1.0 / 3.0)
    return LineEnsemble(times[idx[0]] / h, times[idx[-1]] / h, scaled)


def edge_unscale(ens: LineEnsemble, N: int) -> LineEnsemble:
    """Inverse of edge_scale on the shared grid points."""
    h = float(N) ** (2.0 / 3.0)
    lines = ens.lines * float(N) ** (1.0 / 3.0) + SQRT2 * N
    return LineEnsemble(ens.t_start * h, ens.t_end * h, lines)


def parabolic_shift(ens: LineEnsemble) -> LineEnsemble:
    """out(t) = sqrt(2) * in(t) + t^2."""
    t = ens.times()
    return LineEnsemble(ens.t_start, ens.t_end, SQRT2 * ens.lines + t * t)


def parabolic_unshift(ens: LineEnsemble) -> LineEnsemble:
    """Inverse map: out(t) = (in(t) - t^2) / sqrt(2)."""
    t = ens.times()
    return LineEnsemble(ens.t_start, ens.t_end, (ens.lines - t * t) / SQRT2)


def _grid_slice(ens: LineEnsemble, a: float, b: float) -> slice:
    times = ens.times()
    tol = 1e-9 * max(1.0, abs(ens.t_end - ens.t_start))
    if a < ens.t_start - tol or b > ens.t_end + tol or a > b:
        raise ValueError("[a, b] must lie within the ensemble grid")
    lo = int(np.searchsorted(times, a - tol, side="left"))
    hi = int(np.searchsorted(times, b + tol, side="right"))
    if hi - lo < 1:
        raise ValueError("[a, b] contains no grid point")
    return slice(lo, hi)


def min_gap(ens: LineEnsemble, k: int, a: float, b: float) -> float:
    """Minimal |L_i - L_{i+1}| among the top k lines over grid points of [a, b]."""
    if k < 2:
        raise ValueError("need k >= 2 to have a gap")
    if k > ens.k:
        raise ValueError("k exceeds the number of lines")
    sl = _grid_slice(ens, a, b)
    gaps = np.abs(ens.lines[: k - 1, sl] - ens.lines[1:k, sl])
    return float(gaps.min())


def height_extremes(ens: LineEnsemble, i: int, T: float) -> tuple[float, float]:
    """(min, max) of line i over grid points of [-T, T]."""
    if not 0 <= i < ens.k:
        raise ValueError("line index out of range")
    sl = _grid_slice(ens, -T, T)
    seg = ens.lines[i, sl]
    return float(seg.min()), float(seg.max())


def hypothesis_h3_statistic(replicas, k: int, t: float, delta: float, level: float = 0.95):
    """Frequency of a sub-delta gap among the top k lines at time t.

    Returns (estimate, (ci_lo, ci_hi)) over the replica ensembles.
    """
    replicas = list(replicas)
    if not replicas:
        raise ValueError("need at least one replica")
    if k < 2:
        raise ValueError("need k >= 2")
    hits = 0
    for ens in replicas:
        vals = np.array([ens.value_at(i, t) for i in range(k)])
        gap = np.min(np.abs(np.diff(vals)))
        if gap < delta:
            hits += 1
    estimate = hits / len(replicas)
    return estimate, binom_ci(hits, len(replicas), level)
