"""Bridge resampling of ensemble blocks and acceptance-probability estimation.

A resampling proposal for line i on [a, b] is a zero-pinned bridge plus
the affine shift through the line's current endpoint values.  A proposal
(or a joint block of them) is accepted iff it stays strictly between its
neighbouring curves at every interior grid point; the first accepted
proposal replaces the block.  Under the conditioned-ensemble law this
operation leaves the law invariant, which is the tested contract.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .boundary import BoundaryData
from .bridge import GridPath, sample_bridges
from .ensemble import LineEnsemble
from .geometry import stopping_domain
from .rng import as_generator
from .stats import ks_two_sample

__all__ = [
    "ResampleTimeoutError",
    "AcceptanceEstimate",
    "propose_resample",
    "accept",
    "gibbs_resample",
    "sample_avoiding_rejection",
    "estimate_acceptance_probability",
    "StrongGibbsReport",
    "strong_gibbs_check",
]

_BATCH = 256


class ResampleTimeoutError(RuntimeError):
    """Raised when no proposal was accepted within the attempt budget."""

    def __init__(self, attempts: int):
        upper = 3.0 / attempts if attempts > 0 else 1.0
        super().__init__(
            f"no accepted proposal in {attempts} attempts "
            f"(acceptance estimate 0.0, 95% upper bound ~{upper:.2e})"
        )
        self.attempts = attempts
        self.estimate = 0.0
        self.upper_bound = upper


@dataclass(frozen=True)
class AcceptanceEstimate:
    estimate: float
    stderr: float
    trials: int
    successes: int


def _subgrid(ens: LineEnsemble, a: float, b: float):
    if not a < b:
        raise ValueError("need a < b")
    ja = ens.index_of(a)
    jb = ens.index_of(b)
    if jb <= ja:
        raise ValueError("need at least one grid step between a and b")
    return ja, jb


def propose_resample(ens: LineEnsemble, i: int, a: float, b: float, rng, diffusion: float = 1.0) -> GridPath:
    """One candidate path for line i on [a, b]: zero bridge plus affine shift.

    The candidate agrees with line i at a and b and is independent of the
    ensemble interior.
    """
    if not 0 <= i < ens.k:
        raise ValueError("line index out of range")
    ja, jb = _subgrid(ens, a, b)
    gen = as_generator(rng)
    t = ens.times()
    t_a, t_b = t[ja], t[jb]
    m_sub = jb - ja
    zero = sample_bridges(t_a, t_b, 0.0, 0.0, m_sub, 1, gen, diffusion=diffusion)[0]
    frac = np.linspace(0.0, 1.0, m_sub + 1)
    chord = ens.lines[i, ja] * (1.0 - frac) + ens.lines[i, jb] * frac
    return GridPath(t_a, t_b, zero + chord)


def accept(candidate: GridPath, upper: GridPath | None = None, lower: GridPath | None = None) -> bool:
    """True iff upper > candidate > lower strictly at every interior grid point.

    upper=None / lower=None stand for +inf / -inf.  Endpoint ordering is
    the caller's precondition and is not rechecked.
    """
    for other in (upper, lower):
        if other is not None and (
            other.m != candidate.m
            or abs(other.t_start - candidate.t_start) > 1e-9
            or abs(other.t_end - candidate.t_end) > 1e-9
        ):
            raise ValueError("bounds must share the candidate's grid")
    inner = slice(1, -1)
    vals = candidate.values[inner]
    if upper is not None and not np.all(upper.values[inner] > vals):
        return False
    if lower is not None and not np.all(vals > lower.values[inner]):
        return False
    return True


def _sample_block(batch, t_a, t_b, xa, yb, m_sub, gen, diffusion):
    """batch x k x (m_sub+1) independent bridges with the given endpoints."""
    k = len(xa)
    out = np.empty((batch, k, m_sub + 1), dtype=float)
    for i in range(k):
        out[:, i, :] = sample_bridges(t_a, t_b, xa[i], yb[i], m_sub, batch, gen, diffusion=diffusion)
    return out


def _nc_mask(cands, lower_vals=None, upper_vals=None):
    """Joint avoidance at interior grid points for a batch of proposal blocks."""
    inner = slice(1, -1)
    ok = np.ones(cands.shape[0], dtype=bool)
    if cands.shape[1] > 1:
        ok &= np.all(cands[:, :-1, inner] > cands[:, 1:, inner], axis=(1, 2))
    if lower_vals is not None:
        ok &= np.all(cands[:, -1, inner] > lower_vals[inner], axis=1)
    if upper_vals is not None:
        ok &= np.all(cands[:, 0, inner] < upper_vals[inner], axis=1)
    return ok


def gibbs_resample(
    ens: LineEnsemble,
    block: tuple[int, int],
    a: float,
    b: float,
    rng,
    max_attempts: int = 10**6,
    diffusion: float = 1.0,
    sequential: bool = False,
) -> tuple[LineEnsemble, int]:
    """Replace the block of lines on (a, b) by the first accepted joint proposal.

    block = (k1, k2), inclusive, 0-based from the top line.  All k2-k1+1
    bridges are proposed jointly and accepted only if mutually avoiding and
    avoiding the neighbouring lines (sequential=True instead resamples the
    block one line at a time, a different chain with the same invariant
    law).  Returns (new ensemble, attempts used); values outside (a, b)
    and on other lines are never touched.
    """
    k1, k2 = block
    if not 0 <= k1 <= k2 < ens.k:
        raise ValueError("block out of range")
    if sequential:
        total = 0
        out = ens
        for i in range(k1, k2 + 1):
            out, used = gibbs_resample(out, (i, i), a, b, rng, max_attempts, diffusion)
            total += used
        return out, total

    ja, jb = _subgrid(ens, a, b)
    gen = as_generator(rng)
    t = ens.times()
    t_a, t_b = t[ja], t[jb]
    m_sub = jb - ja
    xa = ens.lines[k1 : k2 + 1, ja]
    yb = ens.lines[k1 : k2 + 1, jb]
    upper_vals = ens.lines[k1 - 1, ja : jb + 1] if k1 > 0 else None
    lower_vals = ens.lines[k2 + 1, ja : jb + 1] if k2 + 1 < ens.k else None

    attempts = 0
    while attempts < max_attempts:
        batch = min(_BATCH, max_attempts - attempts)
        cands = _sample_block(batch, t_a, t_b, xa, yb, m_sub, gen, diffusion)
        ok = _nc_mask(cands, lower_vals, upper_vals)
        hit = int(np.argmax(ok)) if ok.any() else -1
        if hit >= 0:
            attempts += hit + 1
            lines = ens.lines.copy()
            lines[k1 : k2 + 1, ja : jb + 1] = cands[hit]
            return LineEnsemble(ens.t_start, ens.t_end, lines), attempts
        attempts += batch
    raise ResampleTimeoutError(max_attempts)


def sample_avoiding_rejection(
    boundary: BoundaryData,
    m: int,
    rng,
    max_attempts: int = 10**6,
    diffusion: float = 1.0,
) -> tuple[LineEnsemble, int]:
    """Exact sample of k bridges conditioned on mutual and floor avoidance.

    Independent bridges between the boundary data are redrawn until the
    avoidance event holds at every interior grid point.  Returns
    (ensemble, attempts).
    """
    if m < 1:
        raise ValueError("need m >= 1")
    gen = as_generator(rng)
    grid = np.linspace(boundary.a, boundary.b, m + 1)
    floor_vals = boundary.floor_at(grid) if boundary.floor is not None else None
    attempts = 0
    while attempts < max_attempts:
        batch = min(_BATCH, max_attempts - attempts)
        cands = _sample_block(
            batch, boundary.a, boundary.b, boundary.entrance, boundary.exit, m, gen, diffusion
        )
        ok = _nc_mask(cands, floor_vals, None)
        hit = int(np.argmax(ok)) if ok.any() else -1
        if hit >= 0:
            attempts += hit + 1
            return LineEnsemble(boundary.a, boundary.b, cands[hit].copy()), attempts
        attempts += batch
    raise ResampleTimeoutError(max_attempts)


def estimate_acceptance_probability(boundary: BoundaryData, trials: int, m: int, rng) -> AcceptanceEstimate:
    """Monte Carlo estimate of the avoidance probability of independent bridges.

    Proposals depend only on the interval, the boundary lists, m and the
    stream, never on the floor; estimates for two floors from one seed are
    therefore coupled through identical proposals.
    """
    if trials < 1:
        raise ValueError("need trials >= 1")
    if m < 1:
        raise ValueError("need m >= 1")
    gen = as_generator(rng)
    grid = np.linspace(boundary.a, boundary.b, m + 1)
    floor_vals = boundary.floor_at(grid) if boundary.floor is not None else None
    successes = 0
    done = 0
    while done < trials:
        batch = min(_BATCH, trials - done)
        cands = _sample_block(
            batch, boundary.a, boundary.b, boundary.entrance, boundary.exit, m, gen, 1.0
        )
        successes += int(np.count_nonzero(_nc_mask(cands, floor_vals, None)))
        done += batch
    est = successes / trials
    stderr = float(np.sqrt(est * (1.0 - est) / trials))
    return AcceptanceEstimate(est, stderr, trials, successes)


@dataclass
class StrongGibbsReport:
    """Per-probe comparison of interior law against direct conditioned sampling."""

    k: int
    slope_bound: float
    probes: tuple
    ks_statistics: list = field(default_factory=list)
    pvalues: list = field(default_factory=list)
    flagged: list = field(default_factory=list)
    used: int = 0
    excluded_degenerate: int = 0
    timeouts: int = 0

    @property
    def any_flagged(self) -> bool:
        return any(self.flagged)


def strong_gibbs_check(
    replicas,
    k: int,
    K_slope: float,
    window: float,
    rng,
    probes=(0.25, 0.5, 0.75),
    max_attempts: int = 10**5,
    alpha: float = 0.01,
) -> StrongGibbsReport:
    """Test the stopping-domain resampling invariance on replica ensembles.

    For each replica the slope-K stopping domain of line k (0-based) on
    [-window, window] is computed; the top k lines are redrawn on that
    domain directly from the conditioned bridge law, and the original and
    redrawn top-line values at relative probe positions are compared by
    two-sample KS.  Failures are flagged at level alpha with a Bonferroni
    correction; replicas with a degenerate domain are excluded and counted.
    """
    gen = as_generator(rng)
    replicas = list(replicas)
    report = StrongGibbsReport(k=k, slope_bound=K_slope, probes=tuple(probes))
    before = [[] for _ in probes]
    after = [[] for _ in probes]
    for ens in replicas:
        if ens.k < k + 1:
            raise ValueError("replicas must have at least k+1 lines")
        ja = ens.index_of(-window)
        jb = ens.index_of(window)
        lower_path = GridPath(-window, window, ens.lines[k, ja : jb + 1].copy())
        l_t, r_t = stopping_domain(lower_path, K_slope)
        li = ens.index_of(l_t)
        ri = ens.index_of(r_t)
        if ri - li < 2:
            report.excluded_degenerate += 1
            continue
        sub_boundary = BoundaryData(
            l_t,
            r_t,
            ens.lines[:k, li],
            ens.lines[:k, ri],
            floor=GridPath(l_t, r_t, ens.lines[k, li : ri + 1].copy()),
        )
        try:
            redrawn, _ = sample_avoiding_rejection(sub_boundary, ri - li, gen, max_attempts)
        except ResampleTimeoutError:
            report.timeouts += 1
            continue
        report.used += 1
        for p_idx, frac in enumerate(probes):
            t_probe = l_t + frac * (r_t - l_t)
            before[p_idx].append(float(ens.value_at(0, t_probe)))
            after[p_idx].append(float(redrawn.value_at(0, t_probe)))
    threshold = alpha / max(1, len(probes))
    for p_idx in range(len(probes)):
        if len(before[p_idx]) < 2:
            report.ks_statistics.append(float("nan"))
            report.pvalues.append(float("nan"))
            report.flagged.append(False)
            continue
        res = ks_two_sample(before[p_idx], after[p_idx])
        report.ks_statistics.append(res.statistic)
        report.pvalues.append(res.pvalue)
        report.flagged.append(res.pvalue < threshold)
    return report
