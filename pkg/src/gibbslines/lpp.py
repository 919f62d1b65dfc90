"""Last passage percolation with geometric weights and its KPZ rescaling.

Paths take steps x(i+1) = x(i) +- 1 from x(0) = 0; the weight field
w(i, j) lives on 1 <= i <= n, |j| <= i, j = i (mod 2), with i.i.d.
geometric entries P[w = m] = (1-q) q^m.  The passage profile L(n, y) is
computed by the rolling dynamic program
L(i, j) = w(i, j) + max(L(i-1, j-1), L(i-1, j+1)).

Rescaling uses c1 = 2 sqrt(q) / (1 - sqrt(q)),
c2 = q^(1/6) (1 + sqrt(q))^(1/3) / (1 - q), c3 = c2 (1 - sqrt(q)) / (1 + sqrt(q)):
L(n, y) = c1 n + c2 n^(1/3) H_n(c3 y n^(-2/3)) with H_n linearly
interpolated between lattice points.  The profile maximizer location uses
the leftmost-argmax convention.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .rng import as_generator
from .stats import fit_tail_exponent, survival

__all__ = [
    "ScalingConstants",
    "scaling_constants",
    "LppField",
    "sample_field",
    "sample_geometric",
    "passage_profile",
    "brute_force_profile",
    "y_values",
    "RescaledProfile",
    "rescale_profile",
    "unrescale_profile",
    "endpoint",
    "EdgeSamples",
    "sample_edge_statistics",
    "TailReport",
    "endpoint_tail_report",
]

_NEG = np.int64(-(2**62))


@dataclass(frozen=True)
class ScalingConstants:
    c1: float
    c2: float
    c3: float


def scaling_constants(q: float) -> ScalingConstants:
    if not 0.0 < q < 1.0:
        raise ValueError("geometric parameter q must lie in (0, 1)")
    sq = np.sqrt(q)
    c1 = 2.0 * sq / (1.0 - sq)
    c2 = q ** (1.0 / 6.0) * (1.0 + sq) ** (1.0 / 3.0) / (1.0 - q)
    c3 = c2 * (1.0 - sq) / (1.0 + sq)
    return ScalingConstants(float(c1), float(c2), float(c3))


def sample_geometric(q: float, size, rng) -> np.ndarray:
    """Geometric weights by inversion: w = floor(log(u) / log(q)), u in (0, 1]."""
    if not 0.0 < q < 1.0:
        raise ValueError("geometric parameter q must lie in (0, 1)")
    gen = as_generator(rng)
    u = 1.0 - gen.random(size=size)
    return np.floor(np.log(u) / np.log(q)).astype(np.int64)


@dataclass(frozen=True)
class LppField:
    """Weight rows: rows[i-1] holds w(i, -i), w(i, -i+2), ..., w(i, i)."""

    n: int
    q: float
    rows: tuple

    def __post_init__(self):
        if self.n != len(self.rows):
            raise ValueError("need one weight row per path step")
        for i, row in enumerate(self.rows, start=1):
            if row.shape != (i + 1,):
                raise ValueError(f"row {i} must have {i + 1} entries")

    def weight(self, i: int, j: int) -> int:
        if not (1 <= i <= self.n and abs(j) <= i and (j - i) % 2 == 0):
            raise ValueError("weight index off the reachable lattice")
        return int(self.rows[i - 1][(j + i) // 2])


def sample_field(n: int, q: float, rng) -> LppField:
    if n < 1:
        raise ValueError("need n >= 1")
    gen = as_generator(rng)
    rows = tuple(sample_geometric(q, i + 1, gen) for i in range(1, n + 1))
    return LppField(n, q, rows)


def y_values(n: int) -> np.ndarray:
    """Reachable endpoints y = -n, -n+2, ..., n."""
    return np.arange(-n, n + 1, 2, dtype=np.int64)


def passage_profile(field: LppField) -> np.ndarray:
    """L(n, y) for every reachable y, by the rolling-row dynamic program."""
    prev = np.zeros(1, dtype=np.int64)
    for row in field.rows:
        left = np.concatenate([[_NEG], prev])
        right = np.concatenate([prev, [_NEG]])
        prev = row + np.maximum(left, right)
    return prev


def brute_force_profile(field: LppField) -> np.ndarray:
    """Exhaustive maximum over all 2^n paths (oracle; n <= ~14)."""
    n = field.n
    if n > 20:
        raise ValueError("exhaustive enumeration is limited to small n")
    count = 1 << n
    bits = ((np.arange(count)[:, None] >> np.arange(n)[None, :]) & 1).astype(np.int64)
    steps = 2 * bits - 1
    pos = np.cumsum(steps, axis=1)
    totals = np.zeros(count, dtype=np.int64)
    for i in range(1, n + 1):
        totals += field.rows[i - 1][(pos[:, i - 1] + i) // 2]
    out = np.full(n + 1, _NEG, dtype=np.int64)
    np.maximum.at(out, (pos[:, -1] + n) // 2, totals)
    return out


@dataclass(frozen=True)
class RescaledProfile:
    """Sample points (t, H_n(t)); values between points interpolate linearly."""

    t: np.ndarray
    h: np.ndarray

    def value_at(self, x) -> np.ndarray:
        return np.interp(x, self.t, self.h)

    @property
    def domain(self) -> tuple[float, float]:
        return float(self.t[0]), float(self.t[-1])


def rescale_profile(profile: np.ndarray, n: int, q: float) -> RescaledProfile:
    c = scaling_constants(q)
    y = y_values(n)
    t = c.c3 * y * float(n) ** (-2.0 / 3.0)
    h = (profile - c.c1 * n) / (c.c2 * float(n) ** (1.0 / 3.0))
    return RescaledProfile(t, h)


def unrescale_profile(prof: RescaledProfile, n: int, q: float) -> np.ndarray:
    c = scaling_constants(q)
    return prof.h * (c.c2 * float(n) ** (1.0 / 3.0)) + c.c1 * n


def endpoint(prof: RescaledProfile) -> float:
    """Leftmost location of the profile's global maximum."""
    if prof.t.size == 0:
        raise ValueError("empty profile")
    return float(prof.t[int(np.argmax(prof.h))])


@njit(cache=False)
def _dp_final_row(weights, n):
    prev = np.zeros(n + 1, dtype=np.int64)
    cur = np.zeros(n + 1, dtype=np.int64)
    idx = 0
    for i in range(1, n + 1):
        for r in range(i + 1):
            if r == 0:
                best = prev[0]
            elif r == i:
                best = prev[i - 1]
            else:
                a = prev[r - 1]
                b = prev[r]
                best = a if a > b else b
            cur[r] = weights[idx] + best
            idx += 1
        prev, cur = cur, prev
    return prev.copy()


@dataclass(frozen=True)
class EdgeSamples:
    """Per-replica LPP edge statistics at fixed (n, q)."""

    n: int
    q: float
    l_center: np.ndarray
    h_center: np.ndarray
    y_star: np.ndarray
    k_hat: np.ndarray


def sample_edge_statistics(n: int, q: float, replicas: int, rng) -> EdgeSamples:
    """Sample H_n(0), the maximizer location and related statistics.

    Each replica draws a fresh weight field and runs the rolling DP; only
    O(n) memory is used per replica.  h_center is H_n(0) (interpolated when
    n is odd), y_star the leftmost lattice argmax of L(n, .), k_hat the
    rescaled maximizer location.
    """
    if replicas < 1:
        raise ValueError("need replicas >= 1")
    gen = as_generator(rng)
    c = scaling_constants(q)
    total = n * (n + 3) // 2
    logq = np.log(q)
    l0 = np.empty(replicas)
    h0 = np.empty(replicas)
    ystar = np.empty(replicas, dtype=np.int64)
    khat = np.empty(replicas)
    ys = y_values(n)
    scale = c.c2 * float(n) ** (1.0 / 3.0)
    for rep in range(replicas):
        u = 1.0 - gen.random(total)
        weights = np.floor(np.log(u) / logq).astype(np.int64)
        final = _dp_final_row(weights, n)
        r_star = int(np.argmax(final))
        ystar[rep] = ys[r_star]
        khat[rep] = c.c3 * ys[r_star] * float(n) ** (-2.0 / 3.0)
        if n % 2 == 0:
            l0[rep] = final[n // 2]
        else:
            l0[rep] = 0.5 * (final[(n - 1) // 2] + final[(n + 1) // 2])
        h0[rep] = (l0[rep] - c.c1 * n) / scale
    return EdgeSamples(n, q, l0, h0, ystar, khat)


@dataclass(frozen=True)
class TailReport:
    """Empirical survival of |samples| with a fitted cubic-decay exponent."""

    x: np.ndarray
    survival: np.ndarray
    exponent: float | None
    n_samples: int

    @property
    def estimable(self) -> bool:
        return self.exponent is not None


def endpoint_tail_report(samples, x_grid) -> TailReport:
    data = np.abs(np.asarray(samples, dtype=float).ravel())
    if data.size < 1:
        raise ValueError("empty sample")
    xs = np.asarray(x_grid, dtype=float)
    sf = survival(data, xs)
    exponent, _ = fit_tail_exponent(data)
    return TailReport(xs, sf, exponent, data.size)
