"""Least concave majorants and the slope-based stopping domain.

The majorant of a gridded curve is its upper convex hull, computed by a
single monotone scan.  The stopping domain (l_K, r_K) of a curve is read
off the right derivative of its majorant: l_K is the first time the right
slope drops to K or below, r_K the last time it is still at least -K,
with the empty-set conventions l_K = t_end and r_K = t_start.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bridge import GridPath

__all__ = [
    "PiecewiseLinear",
    "least_concave_majorant",
    "majorant_slope_bound",
    "stopping_domain",
]


@dataclass(frozen=True)
class PiecewiseLinear:
    """Piecewise-linear function given by breakpoints strictly increasing in time."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.size < 2 or t.size != v.size:
            raise ValueError("need matching time/value arrays with >= 2 breakpoints")
        if not np.all(np.diff(t) > 0):
            raise ValueError("breakpoint times must be strictly increasing")

    def __call__(self, t):
        return np.interp(t, self.times, self.values)

    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.times)

    def is_concave(self, tol: float = 1e-12) -> bool:
        s = self.slopes()
        return bool(np.all(np.diff(s) <= tol))


def least_concave_majorant(path: GridPath) -> PiecewiseLinear:
    """Minimal concave function dominating the path at every grid point.

    Equals the upper convex hull of the graph; collinear interior points
    are dropped, so the breakpoint set is minimal and every breakpoint
    touches the path.
    """
    t = path.times()
    v = path.values
    hull = [0]
    for j in range(1, t.size):
        while len(hull) > 1:
            i0, i1 = hull[-2], hull[-1]
            # pop i1 unless (i0, i1, j) makes a strict right turn
            cross = (t[i1] - t[i0]) * (v[j] - v[i0]) - (v[i1] - v[i0]) * (t[j] - t[i0])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(j)
    idx = np.array(hull)
    return PiecewiseLinear(t[idx], v[idx])


def majorant_slope_bound(maj: PiecewiseLinear) -> float:
    """Largest absolute segment slope (the Lipschitz constant of the majorant)."""
    return float(np.max(np.abs(maj.slopes())))


def _right_slopes(maj: PiecewiseLinear):
    """Right derivative on [t_start, t_end): the outgoing segment slope.

    At t_end the incoming slope is used instead.
    """
    return maj.slopes()


def stopping_domain(path: GridPath, K: float) -> tuple[float, float]:
    """Slope-K stopping domain (l_K, r_K) of the path's concave majorant.

    l_K = inf{t : right slope of majorant at t <= K} and
    r_K = sup{t : right slope of majorant at t >= -K}, with inf of an
    empty set = t_end and sup of an empty set = t_start.
    """
    if not K > 0:
        raise ValueError("slope bound K must be positive")
    maj = least_concave_majorant(path)
    slopes = _right_slopes(maj)
    t = maj.times

    # slopes are non-increasing (concavity), so both sets are intervals
    below = np.nonzero(slopes <= K)[0]
    if below.size:
        l_K = float(t[below[0]])
    else:
        # at t_end the right derivative is the incoming slope, still > K
        l_K = float(path.t_end)

    under = np.nonzero(slopes < -K)[0]
    if under.size == 0:
        r_K = float(path.t_end)
    elif under[0] == 0:
        # right slope < -K already at t_start: the set is empty
        r_K = float(path.t_start)
    else:
        r_K = float(t[under[0]])

    return l_K, r_K
