"""Empirical-distribution utilities used by the experiment suites.

The KS p-value uses the asymptotic Kolmogorov distribution with the usual
effective-sample-size correction; it is an approximation, and the test
suites treat it as a thresholded statistic rather than an exact p.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .rng import as_generator

__all__ = [
    "Ecdf",
    "ecdf",
    "ks_two_sample",
    "kolmogorov_sf",
    "binom_ci",
    "bootstrap_mean_ci",
    "survival",
    "fit_tail_exponent",
]


class Ecdf:
    """Right-continuous empirical CDF of a one-dimensional sample."""

    def __init__(self, samples):
        data = np.asarray(samples, dtype=float).ravel()
        if data.size == 0:
            raise ValueError("empty sample")
        self.sorted = np.sort(data)
        self.n = data.size

    def __call__(self, x):
        return np.searchsorted(self.sorted, x, side="right") / self.n


def ecdf(samples) -> Ecdf:
    return Ecdf(samples)


def kolmogorov_sf(lam: float) -> float:
    """Survival function of the Kolmogorov distribution, Q(lam)."""
    if lam <= 0:
        return 1.0
    total = 0.0
    for k in range(1, 101):
        term = 2.0 * (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * lam * lam)
        total += term
        if abs(term) < 1e-12:
            break
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    pvalue: float


def ks_two_sample(a, b) -> KsResult:
    """Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value."""
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    n1, n2 = a.size, b.size
    if n1 == 0 or n2 == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([a, b])
    cdf1 = np.searchsorted(a, pooled, side="right") / n1
    cdf2 = np.searchsorted(b, pooled, side="right") / n2
    d = float(np.max(np.abs(cdf1 - cdf2)))
    en = math.sqrt(n1 * n2 / (n1 + n2))
    p = kolmogorov_sf((en + 0.12 + 0.11 / en) * d)
    return KsResult(d, p)


def binom_ci(successes: int, trials: int, level: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("need trials >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes out of range")
    if not 0 < level < 1:
        raise ValueError("level must be in (0, 1)")
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def bootstrap_mean_ci(samples, resamples: int, level: float, rng):
    """Percentile bootstrap confidence interval for the sample mean."""
    data = np.asarray(samples, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("empty sample")
    if resamples < 1:
        raise ValueError("need resamples >= 1")
    gen = as_generator(rng)
    idx = gen.integers(0, data.size, size=(resamples, data.size))
    means = data[idx].mean(axis=1)
    alpha = (1.0 - level) / 2.0
    lo, hi = np.quantile(means, [alpha, 1.0 - alpha])
    return float(lo), float(hi)


def survival(samples, x_grid) -> np.ndarray:
    """Empirical P(X >= x) at each x of the grid."""
    data = np.sort(np.asarray(samples, dtype=float).ravel())
    if data.size == 0:
        raise ValueError("empty sample")
    xs = np.asarray(x_grid, dtype=float)
    return 1.0 - np.searchsorted(data, xs, side="left") / data.size


def fit_tail_exponent(samples, s_window=(1e-3, 1e-1), n_grid: int = 40):
    """Fit the decay exponent of log-survival against log x.

    Assuming P(X >= x) ~ exp(-c x^p) in the tail, the slope of
    log(-log S(x)) versus log x over the decade where S lies inside
    s_window estimates p.  Returns (exponent, x_used) or (None, x_used)
    when fewer than two usable grid points fall in the window.
    """
    data = np.asarray(samples, dtype=float).ravel()
    pos = data[data > 0]
    if pos.size == 0:
        return None, np.array([])
    lo_q = 1.0 - s_window[1]
    hi_q = 1.0 - s_window[0]
    x_lo = np.quantile(pos, lo_q)
    x_hi = np.quantile(pos, min(hi_q, 1.0 - 1.0 / pos.size))
    if not (x_hi > x_lo > 0):
        return None, np.array([])
    xs = np.exp(np.linspace(math.log(x_lo), math.log(x_hi), n_grid))
    sf = survival(pos, xs)
    keep = (sf >= s_window[0]) & (sf <= s_window[1]) & (sf < 1.0)
    xs = xs[keep]
    sf = sf[keep]
    if xs.size < 2:
        return None, xs
    lx = np.log(xs)
    ly = np.log(-np.log(sf))
    slope = np.polyfit(lx, ly, 1)[0]
    return float(slope), xs
