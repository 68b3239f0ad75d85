"""Two-sided (1 - 2*alpha) confidence intervals for the response rate.

Five constructions: the fixed-sample exact interval that ignores the
monitoring (cp), its counterpart on the terminal distribution with the
stage-wise ordering (jt), mid-p versions of both that count only half
of the observed point's mass, and the acceptance-region interval built
from minimum-cardinality regions swept over a fine rate grid (dufsat).
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import binom

from .distribution import SamplingDistribution, TerminalOutcome

METHODS = ("cp", "jt", "midp-cp", "midp-jt", "dufsat")

_BISECT_TOL = 1e-10


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    method: str
    level: float

    def contains(self, p: float) -> bool:
        return self.lower <= p <= self.upper

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def to_dict(self) -> dict:
        return {"method": self.method, "level": self.level,
                "lower": self.lower, "upper": self.upper}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class AcceptanceRegion:
    """Contiguous run of support outcomes holding mass >= 1 - 2*alpha at p."""

    p: float
    start: int
    stop: int  # inclusive index in the stage-wise ordering
    outcomes: tuple[TerminalOutcome, ...]


def _solve_monotone(fn: Callable[[float], float], target: float,
                    tol: float = _BISECT_TOL) -> float | None:
    """Root of a monotone function on [0, 1] by bisection.

    Returns None when the target is never crossed; the caller clamps to
    the appropriate endpoint.
    """
    f0, f1 = fn(0.0), fn(1.0)
    increasing = f1 >= f0
    lo_val, hi_val = (f0, f1) if increasing else (f1, f0)
    if not lo_val <= target <= hi_val:
        return None
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (fn(mid) < target) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _clamped(lower: float | None, upper: float | None, method: str, alpha: float) -> ConfidenceInterval:
    return ConfidenceInterval(
        lower=0.0 if lower is None else lower,
        upper=1.0 if upper is None else upper,
        method=method,
        level=1.0 - 2.0 * alpha,
    )


def cp_interval(m: int, s: int, alpha: float) -> ConfidenceInterval:
    """Exact equal-tail interval from the fixed-sample binomial at (m, s).

    The upper endpoint solves Pr[Bin(m, p) <= s] = alpha and the lower
    endpoint Pr[Bin(m, p) >= s] = alpha, with the conventional clamps
    lower = 0 at s = 0 and upper = 1 at s = m.
    """
    if not 0 <= s <= m:
        raise ValueError(f"need 0 <= s <= m, got s={s}, m={m}")
    if not 0.0 < alpha < 0.5:
        raise ValueError(f"alpha={alpha} outside (0, 0.5)")
    lower = _solve_monotone(lambda p: binom.sf(s - 1, m, p), alpha)
    upper = _solve_monotone(lambda p: binom.cdf(s, m, p), alpha)
    return _clamped(lower, upper, "cp", alpha)


def midp_cp_interval(m: int, s: int, alpha: float) -> ConfidenceInterval:
    """Mid-p variant of :func:`cp_interval`: each tail counts only half of
    the observed outcome's mass, shrinking the interval."""
    if not 0 <= s <= m:
        raise ValueError(f"need 0 <= s <= m, got s={s}, m={m}")
    lower = _solve_monotone(
        lambda p: binom.sf(s, m, p) + 0.5 * binom.pmf(s, m, p), alpha)
    upper = _solve_monotone(
        lambda p: binom.cdf(s - 1, m, p) + 0.5 * binom.pmf(s, m, p), alpha)
    return _clamped(lower, upper, "midp-cp", alpha)


def _tail_below(dist: SamplingDistribution, idx: int, p: float) -> float:
    return float(dist.pmf_vector(p)[: idx + 1].sum())


def _tail_above(dist: SamplingDistribution, idx: int, p: float) -> float:
    return float(dist.pmf_vector(p)[idx:].sum())


def jt_interval(dist: SamplingDistribution, m: int, s: int, alpha: float) -> ConfidenceInterval:
    """Equal-tail exact interval on the terminal distribution.

    Tails accumulate terminal mass through the stage-wise ordering: the
    upper endpoint makes the observed-or-worse region improbable, the
    lower endpoint the observed-or-better region.  Degenerate tails at
    the extreme outcomes clamp to 0 or 1.
    """
    idx = dist.order_index(m, s)
    lower = _solve_monotone(lambda p: _tail_above(dist, idx, p), alpha)
    upper = _solve_monotone(lambda p: _tail_below(dist, idx, p), alpha)
    return _clamped(lower, upper, "jt", alpha)


def midp_jt_interval(dist: SamplingDistribution, m: int, s: int, alpha: float) -> ConfidenceInterval:
    """Mid-p variant of :func:`jt_interval` on the terminal distribution."""
    idx = dist.order_index(m, s)

    def upper_tail(p: float) -> float:
        f = dist.pmf_vector(p)
        return float(f[:idx].sum() + 0.5 * f[idx])

    def lower_tail(p: float) -> float:
        f = dist.pmf_vector(p)
        return float(f[idx + 1:].sum() + 0.5 * f[idx])

    lower = _solve_monotone(lower_tail, alpha)
    upper = _solve_monotone(upper_tail, alpha)
    return _clamped(lower, upper, "midp-jt", alpha)


def _grid_pmf_matrix(dist: SamplingDistribution, grid: np.ndarray) -> np.ndarray:
    """Terminal pmf at every grid rate, log-domain inside (0, 1)."""
    n = len(dist)
    F = np.empty((grid.size, n))
    inner = (grid > 0.0) & (grid < 1.0)
    p = grid[inner][:, None]
    F[inner] = np.exp(dist._log_c[None, :]
                      + dist._s[None, :] * np.log(p)
                      + (dist._m - dist._s)[None, :] * np.log1p(-p))
    for gi in np.flatnonzero(~inner):
        F[gi] = dist.pmf_vector(float(grid[gi]))
    return F


def _greedy_region(f: np.ndarray, target: float) -> tuple[int, int]:
    """Grow a contiguous run from the modal outcome until it holds ``target``
    mass, always absorbing the heavier neighbour (ties extend upward)."""
    n = f.size
    j = int(np.flatnonzero(f == f.max())[-1])
    lo = hi = j
    total = f[j]
    while total < target and (lo > 0 or hi < n - 1):
        left = f[lo - 1] if lo > 0 else -1.0
        right = f[hi + 1] if hi < n - 1 else -1.0
        if right >= left:
            hi += 1
            total += f[hi]
        else:
            lo -= 1
            total += f[lo]
    return lo, hi


def minimum_cardinality_region(dist: SamplingDistribution, p: float, alpha: float) -> AcceptanceRegion:
    """Greedy minimum-cardinality acceptance region at a single rate."""
    f = dist.pmf_vector(p)
    lo, hi = _greedy_region(f, 1.0 - 2.0 * alpha)
    return AcceptanceRegion(p=p, start=lo, stop=hi, outcomes=dist.support[lo:hi + 1])


def _dufsat_endpoints(dist: SamplingDistribution, alpha: float,
                      grid_step: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Interval endpoints for every support outcome from the region sweep.

    Regions are built greedily at each grid rate and then repaired so both
    region edges are nondecreasing in p (coherence); a raised lower edge
    is compensated by extending upward until the mass target is restored.
    """
    key = ("dufsat", alpha, grid_step)
    if key in dist._cache:
        return dist._cache[key]
    n = len(dist)
    steps = round(1.0 / grid_step)
    grid = np.arange(steps + 1) * grid_step
    F = _grid_pmf_matrix(dist, grid)
    target = 1.0 - 2.0 * alpha
    lo_edge = np.empty(grid.size, dtype=int)
    hi_edge = np.empty(grid.size, dtype=int)
    prev_lo = prev_hi = 0
    for gi in range(grid.size):
        f = F[gi]
        lo, hi = _greedy_region(f, target)
        if gi > 0:
            if lo < prev_lo:
                lo = prev_lo
                total = f[lo:hi + 1].sum()
                while total < target and hi < n - 1:
                    hi += 1
                    total += f[hi]
            if hi < prev_hi:
                hi = prev_hi
        lo_edge[gi], hi_edge[gi] = lo, hi
        prev_lo, prev_hi = lo, hi
    # Edges are monotone, so each outcome is accepted on a contiguous p-range.
    lower = np.empty(n)
    upper = np.empty(n)
    for i in range(n):
        accepted = np.flatnonzero((lo_edge <= i) & (hi_edge >= i))
        lower[i] = grid[accepted[0]]
        upper[i] = grid[accepted[-1]]
    dist._cache[key] = (grid, lower, upper)
    return dist._cache[key]


def dufsat_interval(dist: SamplingDistribution, m: int, s: int, alpha: float,
                    grid_step: float = 0.0001) -> ConfidenceInterval:
    """Acceptance-region interval: the range of grid rates whose
    minimum-cardinality region contains the observed outcome."""
    idx = dist.order_index(m, s)
    _, lower, upper = _dufsat_endpoints(dist, alpha, grid_step)
    return ConfidenceInterval(lower=float(lower[idx]), upper=float(upper[idx]),
                              method="dufsat", level=1.0 - 2.0 * alpha)


def interval_for(dist: SamplingDistribution, method: str, m: int, s: int,
                 alpha: float) -> ConfidenceInterval:
    """Dispatch by method name (one of METHODS)."""
    if method == "cp":
        return cp_interval(m, s, alpha)
    if method == "jt":
        return jt_interval(dist, m, s, alpha)
    if method == "midp-cp":
        return midp_cp_interval(m, s, alpha)
    if method == "midp-jt":
        return midp_jt_interval(dist, m, s, alpha)
    if method == "dufsat":
        return dufsat_interval(dist, m, s, alpha)
    raise ValueError(f"unknown interval method {method!r}")


def support_intervals(dist: SamplingDistribution, method: str, alpha: float) -> list[ConfidenceInterval]:
    """Intervals for every terminal outcome, in support order."""
    return [interval_for(dist, method, o.m, o.s, alpha) for o in dist.support]


def exact_coverage(dist: SamplingDistribution, intervals: list[ConfidenceInterval],
                   p: float) -> float:
    """Probability that the realized interval covers p, by exact summation."""
    f = dist.pmf_vector(p)
    hit = np.array([iv.contains(p) for iv in intervals])
    return float(f[hit].sum())


def expected_length(dist: SamplingDistribution, intervals: list[ConfidenceInterval],
                    p: float) -> float:
    f = dist.pmf_vector(p)
    lengths = np.array([iv.length for iv in intervals])
    return float(f @ lengths)


def interval_table(dist: SamplingDistribution, alpha: float,
                   methods: tuple[str, ...] = METHODS) -> list[dict]:
    """One row per terminal outcome with endpoints for each method."""
    columns = {mth: support_intervals(dist, mth, alpha) for mth in methods}
    rows = []
    for i, o in enumerate(dist.support):
        row = {"m": o.m, "s": o.s, "kind": o.kind.value}
        for mth in methods:
            tag = mth.replace("-", "_")
            row[f"{tag}_lower"] = columns[mth][i].lower
            row[f"{tag}_upper"] = columns[mth][i].upper
        rows.append(row)
    return rows


def write_interval_csv(dist: SamplingDistribution, path: str, alpha: float,
                       methods: tuple[str, ...] = METHODS) -> None:
    rows = interval_table(dist, alpha, methods)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
