"""Single-site dynamics on systems of non-intersecting lattice walk bridges.

State: k walk bridges on the lattice with spatial step 1/n and temporal
step 1/n^2, strictly ordered at every lattice time and strictly above an
optional floor.  An update picks an interior time, a line and a direction
and moves that single value by +-2/n iff the result is still a valid
ordered walk system; rejection is a legal outcome.  The chain is
irreducible on the admissible set and reversible with respect to the
uniform measure on it, which is exactly the conditioned walk-bridge law.

Running two chains off one shared event stream couples them monotonically:
if one system's floor and boundary data dominate the other's, the
domination persists after every update.

Heights are stored as int64 in units of 1/n so all chain arithmetic is
exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit

from .boundary import BoundaryData
from .rng import as_generator

__all__ = [
    "LatticeBridgeSystem",
    "FlipEvent",
    "InfeasibleBoundaryError",
    "RejectionLimitError",
    "lattice_step_count",
    "lowest_initial_configuration",
    "highest_configuration",
    "glauber_step",
    "run_chain",
    "run_chain_occupancy",
    "run_coupled_chains",
    "sample_uniform_walk",
    "sample_admissible_rejection",
    "estimate_lattice_acceptance",
    "enumerate_walk_bridges",
    "enumerate_admissible_systems",
]

_NO_FLOOR = np.int64(-(2**62))
_EVENT_CHUNK = 1 << 20


class InfeasibleBoundaryError(ValueError):
    """No admissible configuration exists for the given boundary data."""


class RejectionLimitError(RuntimeError):
    """Rejection sampler exhausted its attempt budget."""

    def __init__(self, attempts: int):
        super().__init__(f"no admissible sample in {attempts} attempts")
        self.attempts = attempts


@dataclass(frozen=True)
class FlipEvent:
    """One attempted update: interior time index, line index, +-1 direction."""

    time_index: int
    line: int
    direction: int

    def __post_init__(self):
        if self.direction not in (-1, 1):
            raise ValueError("direction must be +1 or -1")


@dataclass
class LatticeBridgeSystem:
    """k ordered walk bridges over [a, b] on the 1/n lattice.

    heights[i, j] is line i at time a + j/n^2, in units of 1/n; line 0 is
    the top line.  floor_min[j] is the smallest admissible integer height
    for the bottom line (a large negative sentinel when there is no floor).
    """

    n: int
    a: float
    b: float
    heights: np.ndarray
    floor_min: np.ndarray

    @property
    def k(self) -> int:
        return self.heights.shape[0]

    @property
    def steps(self) -> int:
        return self.heights.shape[1] - 1

    def times(self) -> np.ndarray:
        return self.a + np.arange(self.steps + 1) / self.n**2

    def values(self) -> np.ndarray:
        """Heights in real units (k x (steps+1) floats)."""
        return self.heights / self.n

    def copy(self) -> "LatticeBridgeSystem":
        return LatticeBridgeSystem(self.n, self.a, self.b, self.heights.copy(), self.floor_min)

    def validate(self) -> None:
        h = self.heights
        if h.dtype != np.int64 or h.ndim != 2 or h.shape[1] < 2:
            raise ValueError("heights must be a k x (steps+1) int64 array")
        if not np.all(np.abs(np.diff(h, axis=1)) == 1):
            raise ValueError("every line must move by exactly one lattice unit per step")
        if h.shape[0] > 1 and not np.all(h[:-1] > h[1:]):
            raise ValueError("lines must be strictly ordered at every lattice time")
        if not np.all(h[-1] >= self.floor_min):
            raise ValueError("bottom line must stay strictly above the floor")


def lattice_step_count(a: float, b: float, n: int) -> int:
    """Number of temporal lattice steps on [a, b]; (b - a) n^2 must be integral."""
    if n < 1:
        raise ValueError("lattice refinement n must be >= 1")
    raw = (b - a) * n * n
    steps = int(round(raw))
    if steps < 1 or abs(raw - steps) > 1e-9:
        raise ValueError(f"(b - a) * n^2 = {raw} is not a positive integer")
    return steps


def _to_lattice(values: np.ndarray, n: int, what: str) -> np.ndarray:
    scaled = np.asarray(values, dtype=float) * n
    ints = np.floor(scaled + 1e-9).astype(np.int64)
    if np.max(np.abs(scaled - ints)) > 1e-9:
        warnings.warn(f"{what} values rounded down to the 1/{n} lattice", stacklevel=3)
    return ints


def _floor_min_int(boundary: BoundaryData, times: np.ndarray, n: int) -> np.ndarray:
    if boundary.floor is None:
        return np.full(times.size, _NO_FLOOR, dtype=np.int64)
    fv = boundary.floor.value_at(times) * n
    # smallest integer strictly above fv
    return np.floor(fv + 1e-9).astype(np.int64) + 1


def _parity_lift(bound: np.ndarray, x0: int, j: np.ndarray) -> np.ndarray:
    """Smallest values >= bound with the walk parity (x0 + j) mod 2."""
    return bound + ((bound - (x0 + j)) & 1)


def _minimal_walk(x: int, y: int, steps: int, min_int: np.ndarray, line_label: str) -> np.ndarray:
    if abs(y - x) > steps:
        raise InfeasibleBoundaryError(
            f"{line_label}: |exit - entrance| = {abs(y - x)} lattice units exceeds {steps} steps"
        )
    if (y - x - steps) % 2 != 0:
        raise InfeasibleBoundaryError(
            f"{line_label}: entrance/exit parity is incompatible with {steps} steps"
        )
    j = np.arange(steps + 1, dtype=np.int64)
    w = np.maximum(x - j, y - (steps - j))
    has_floor = min_int > _NO_FLOOR
    if np.any(has_floor):
        lifted = _parity_lift(np.where(has_floor, min_int, w), x, j)
        w = np.maximum(w, np.where(has_floor, lifted, w))
    # expand every lower-bound cone: running max of w_j' -+ j'
    w = np.maximum.accumulate(w + j) - j
    w = (np.maximum.accumulate((w - j)[::-1])[::-1]) + j
    if w[0] > x:
        raise InfeasibleBoundaryError(
            f"{line_label}: entrance value is below the constraint at the interval start"
        )
    if w[steps] > y:
        raise InfeasibleBoundaryError(
            f"{line_label}: exit value is below the constraint at the interval end"
        )
    return w


def _lattice_boundary(boundary: BoundaryData, n: int):
    steps = lattice_step_count(boundary.a, boundary.b, n)
    x = _to_lattice(boundary.entrance, n, "entrance")
    y = _to_lattice(boundary.exit, n, "exit")
    if x.size > 1 and (np.any(np.diff(x) >= 0) or np.any(np.diff(y) >= 0)):
        raise InfeasibleBoundaryError("boundary lists are no longer strictly decreasing on the lattice")
    times = boundary.a + np.arange(steps + 1) / n**2
    floor_min = _floor_min_int(boundary, times, n)
    if x[-1] < floor_min[0]:
        raise InfeasibleBoundaryError("line k-1: entrance value is at or below the floor")
    if y[-1] < floor_min[-1]:
        raise InfeasibleBoundaryError("line k-1: exit value is at or below the floor")
    return steps, x, y, floor_min


def lowest_initial_configuration(boundary: BoundaryData, n: int) -> LatticeBridgeSystem:
    """Pointwise-minimal admissible configuration (no down-flip is admissible)."""
    steps, x, y, floor_min = _lattice_boundary(boundary, n)
    k = x.size
    heights = np.empty((k, steps + 1), dtype=np.int64)
    below = floor_min
    for i in range(k - 1, -1, -1):
        heights[i] = _minimal_walk(int(x[i]), int(y[i]), steps, below, f"line {i}")
        below = heights[i] + 1
    sys = LatticeBridgeSystem(n, boundary.a, boundary.b, heights, floor_min)
    sys.validate()
    return sys


def highest_configuration(boundary: BoundaryData, n: int) -> LatticeBridgeSystem:
    """Pointwise-maximal admissible configuration (mirror of the lowest)."""
    steps, x, y, floor_min = _lattice_boundary(boundary, n)
    k = x.size
    heights = np.empty((k, steps + 1), dtype=np.int64)
    no_ceiling = np.full(steps + 1, _NO_FLOOR, dtype=np.int64)
    above = no_ceiling
    for i in range(k):
        # maximal walk below a ceiling = -(minimal walk above the negated ceiling)
        heights[i] = -_minimal_walk(-int(x[i]), -int(y[i]), steps, above, f"line {i}")
        above = -heights[i] + 1
    sys = LatticeBridgeSystem(n, boundary.a, boundary.b, heights, floor_min)
    sys.validate()
    return sys


@njit(cache=False)
def _apply_events(heights, floor_min, t_idx, line, direction):
    k = heights.shape[0]
    for e in range(t_idx.shape[0]):
        s = t_idx[e]
        i = line[e]
        cand = heights[i, s] + 2 * direction[e]
        d = cand - heights[i, s - 1]
        if d != 1 and d != -1:
            continue
        d = cand - heights[i, s + 1]
        if d != 1 and d != -1:
            continue
        if i > 0 and cand >= heights[i - 1, s]:
            continue
        if i < k - 1:
            if cand <= heights[i + 1, s]:
                continue
        elif cand < floor_min[s]:
            continue
        heights[i, s] = cand


@njit(cache=False)
def _apply_events_coded(heights, floor_min, t_idx, line, direction, weights, codes, code0):
    """Like _apply_events but records the packed state code after each event."""
    k = heights.shape[0]
    code = code0
    for e in range(t_idx.shape[0]):
        s = t_idx[e]
        i = line[e]
        cand = heights[i, s] + 2 * direction[e]
        ok = True
        d = cand - heights[i, s - 1]
        if d != 1 and d != -1:
            ok = False
        if ok:
            d = cand - heights[i, s + 1]
            if d != 1 and d != -1:
                ok = False
        if ok and i > 0 and cand >= heights[i - 1, s]:
            ok = False
        if ok:
            if i < k - 1:
                if cand <= heights[i + 1, s]:
                    ok = False
            elif cand < floor_min[s]:
                ok = False
        if ok:
            code += (cand - heights[i, s]) * weights[i, s]
            heights[i, s] = cand
        codes[e] = code


def _draw_events(gen, count: int, steps: int, k: int):
    t_idx = gen.integers(1, steps, size=count, dtype=np.int64)
    line = gen.integers(0, k, size=count, dtype=np.int64)
    direction = gen.integers(0, 2, size=count, dtype=np.int64) * 2 - 1
    return t_idx, line, direction


def updates_per_sweep(system: LatticeBridgeSystem) -> int:
    return (system.steps - 1) * system.k * 2


def glauber_step(state: LatticeBridgeSystem, event: FlipEvent) -> LatticeBridgeSystem:
    """Attempt one flip; returns the new state, or the input if rejected."""
    if not 1 <= event.time_index <= state.steps - 1:
        raise ValueError("event time index must be interior")
    if not 0 <= event.line < state.k:
        raise ValueError("event line index out of range")
    out = state.copy()
    _apply_events(
        out.heights,
        state.floor_min,
        np.array([event.time_index], dtype=np.int64),
        np.array([event.line], dtype=np.int64),
        np.array([event.direction], dtype=np.int64),
    )
    if np.array_equal(out.heights, state.heights):
        return state
    return out


def run_chain(init: LatticeBridgeSystem, sweeps: int, rng) -> LatticeBridgeSystem:
    """Run uniform random single-site updates; one sweep = (steps-1) * k * 2 events."""
    if sweeps < 0:
        raise ValueError("sweeps must be >= 0")
    out = init.copy()
    total = sweeps * updates_per_sweep(init)
    if total == 0:
        return out
    gen = as_generator(rng)
    done = 0
    while done < total:
        count = min(_EVENT_CHUNK, total - done)
        t_idx, line, direction = _draw_events(gen, count, init.steps, init.k)
        _apply_events(out.heights, out.floor_min, t_idx, line, direction)
        done += count
    return out


def _state_weights(system: LatticeBridgeSystem, lo: int, hi: int):
    """Mixed-radix weights packing a whole configuration into one int64."""
    radix = hi - lo + 1
    sites = system.k * (system.steps + 1)
    if sites * np.log2(radix) > 62:
        raise ValueError("state space too large to pack into 64-bit occupancy codes")
    w = radix ** np.arange(sites, dtype=object)
    weights = np.array(w, dtype=np.int64).reshape(system.k, system.steps + 1)
    return weights


def encode_state(heights: np.ndarray, weights: np.ndarray, lo: int) -> int:
    return int(np.sum((heights.astype(np.int64) - lo) * weights))


def run_chain_occupancy(init: LatticeBridgeSystem, n_updates: int, rng, lo: int, hi: int):
    """Run n_updates events recording the packed state code after each one.

    lo/hi must bound every height that can occur (use the lowest and
    highest configurations).  Returns (final_system, codes, weights).
    """
    out = init.copy()
    weights = _state_weights(init, lo, hi)
    gen = as_generator(rng)
    codes = np.empty(n_updates, dtype=np.int64)
    code = encode_state(out.heights, weights, lo)
    done = 0
    while done < n_updates:
        count = min(_EVENT_CHUNK, n_updates - done)
        t_idx, line, direction = _draw_events(gen, count, init.steps, init.k)
        chunk = codes[done : done + count]
        _apply_events_coded(out.heights, out.floor_min, t_idx, line, direction, weights, chunk, code)
        code = int(chunk[-1])
        done += count
    return out, codes, weights


def run_coupled_chains(
    boundary_f: BoundaryData,
    boundary_g: BoundaryData,
    n: int,
    sweeps: int,
    rng,
    on_sweep=None,
):
    """Evolve the f- and g-systems off one shared event stream.

    Requires floor_f <= floor_g pointwise and entrance/exit data of g
    dominating those of f coordinatewise.  The shared stream preserves
    X^f_i(s) <= X^g_i(s) for every line and lattice time; the returned
    pair satisfies it, and on_sweep(sweep_index, sys_f, sys_g) is called
    after every sweep.
    """
    if boundary_f.k != boundary_g.k:
        raise ValueError("coupled systems must have the same number of lines")
    sys_f = lowest_initial_configuration(boundary_f, n)
    sys_g = lowest_initial_configuration(boundary_g, n)
    if not np.all(sys_f.floor_min <= sys_g.floor_min):
        raise ValueError("need floor_f <= floor_g pointwise at lattice times")
    if np.any(sys_f.heights[:, 0] > sys_g.heights[:, 0]) or np.any(
        sys_f.heights[:, -1] > sys_g.heights[:, -1]
    ):
        raise ValueError("boundary data of g must dominate boundary data of f")
    if not np.all(sys_f.heights <= sys_g.heights):
        raise RuntimeError("lowest configurations are not ordered (this is a bug)")
    gen = as_generator(rng)
    per_sweep = updates_per_sweep(sys_f)
    for sweep in range(sweeps):
        if per_sweep > 0:
            t_idx, line, direction = _draw_events(gen, per_sweep, sys_f.steps, sys_f.k)
            _apply_events(sys_f.heights, sys_f.floor_min, t_idx, line, direction)
            _apply_events(sys_g.heights, sys_g.floor_min, t_idx, line, direction)
        if on_sweep is not None:
            on_sweep(sweep, sys_f, sys_g)
    if not np.all(sys_f.heights <= sys_g.heights):
        raise RuntimeError("shared-clock coupling lost its ordering (this is a bug)")
    return sys_f, sys_g


def sample_uniform_walk(x_int: int, y_int: int, steps: int, rng) -> np.ndarray:
    """One uniform walk bridge from x_int to y_int in the given step count."""
    diff = y_int - x_int
    if abs(diff) > steps or (diff - steps) % 2 != 0:
        raise ValueError("no walk connects the endpoints in the given step count")
    gen = as_generator(rng)
    ups = (steps + diff) // 2
    step_arr = np.full(steps, -1, dtype=np.int64)
    step_arr[gen.permutation(steps)[:ups]] = 1
    walk = np.empty(steps + 1, dtype=np.int64)
    walk[0] = x_int
    np.cumsum(step_arr, out=walk[1:])
    walk[1:] += x_int
    return walk


def _admissible(heights: np.ndarray, floor_min: np.ndarray) -> bool:
    if heights.shape[0] > 1 and not np.all(heights[:-1] > heights[1:]):
        return False
    return bool(np.all(heights[-1] >= floor_min))


def sample_admissible_rejection(boundary: BoundaryData, n: int, rng, max_attempts: int = 10**5):
    """Independent uniform walk bridges resampled until admissible.

    This is a perfect sampler for the conditioned (uniform-on-admissible)
    law; it is practical only when the acceptance probability is not tiny.
    Returns (system, attempts).
    """
    steps, x, y, floor_min = _lattice_boundary(boundary, n)
    gen = as_generator(rng)
    k = x.size
    for attempt in range(1, max_attempts + 1):
        heights = np.vstack([sample_uniform_walk(int(x[i]), int(y[i]), steps, gen) for i in range(k)])
        if _admissible(heights, floor_min):
            return LatticeBridgeSystem(n, boundary.a, boundary.b, heights, floor_min), attempt
    raise RejectionLimitError(max_attempts)


def estimate_lattice_acceptance(boundary: BoundaryData, n: int, trials: int, rng):
    """Fraction of independent k-walk samples that are admissible, with stderr."""
    if trials < 1:
        raise ValueError("need trials >= 1")
    steps, x, y, floor_min = _lattice_boundary(boundary, n)
    gen = as_generator(rng)
    k = x.size
    hits = 0
    for _ in range(trials):
        heights = np.vstack([sample_uniform_walk(int(x[i]), int(y[i]), steps, gen) for i in range(k)])
        if _admissible(heights, floor_min):
            hits += 1
    est = hits / trials
    stderr = np.sqrt(est * (1 - est) / trials)
    return est, float(stderr)


def enumerate_walk_bridges(x_int: int, y_int: int, steps: int) -> np.ndarray:
    """All walk bridges from x_int to y_int (rows), for small step counts."""
    diff = y_int - x_int
    if abs(diff) > steps or (diff - steps) % 2 != 0:
        return np.empty((0, steps + 1), dtype=np.int64)
    ups = (steps + diff) // 2
    walks = []
    for pos in combinations(range(steps), ups):
        step_arr = np.full(steps, -1, dtype=np.int64)
        step_arr[list(pos)] = 1
        walks.append(np.concatenate([[x_int], x_int + np.cumsum(step_arr)]))
    return np.array(walks, dtype=np.int64)


def enumerate_admissible_systems(boundary: BoundaryData, n: int, limit: int = 10**6) -> np.ndarray:
    """All admissible k-line systems (count x k x (steps+1)), for toy instances."""
    steps, x, y, floor_min = _lattice_boundary(boundary, n)
    k = x.size
    per_line = [enumerate_walk_bridges(int(x[i]), int(y[i]), steps) for i in range(k)]
    total = 1
    for w in per_line:
        total *= max(1, w.shape[0])
        if total > limit:
            raise ValueError("instance too large to enumerate")

    systems = []

    def recurse(i, stack):
        if i == k:
            systems.append(np.array(stack))
            return
        for walk in per_line[i]:
            if i > 0 and not np.all(stack[-1] > walk):
                continue
            if i == k - 1 and not np.all(walk >= floor_min):
                continue
            stack.append(walk)
            recurse(i + 1, stack)
            stack.pop()

    recurse(0, [])
    if not systems:
        return np.empty((0, k, steps + 1), dtype=np.int64)
    return np.array(systems, dtype=np.int64)
