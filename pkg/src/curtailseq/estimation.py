"""Point estimation after a sequentially stopped trial.

Stopping makes the unadjusted estimate s/m biased, so three estimators
are provided: the naive ratio, a bias-adjusted version that subtracts
the exact expected bias, and a median unbiased estimate built from two
one-sided p-value functions evaluated on a fine response-rate grid.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable

import numpy as np

from .distribution import SamplingDistribution, expected_naive_estimate


class Ordering(Enum):
    """How terminal outcomes are ranked when accumulating tail probability."""

    SAMPLE_SPACE = "samplespace"  # by responder count alone
    STAGE_WISE = "stagewise"      # by position in the stage-wise order


class AdjustMode(Enum):
    PLUG_IN = "plugin"
    ROOT_SOLVE = "rootsolve"


@dataclass(frozen=True)
class EstimateReport:
    naive: float
    bias_adjusted: float
    mue: float
    mue_lower: float
    mue_upper: float
    ordering: Ordering

    def to_dict(self) -> dict:
        return {
            "naive": self.naive,
            "bias_adjusted": self.bias_adjusted,
            "mue": self.mue,
            "mue_lower": self.mue_lower,
            "mue_upper": self.mue_upper,
            "ordering": self.ordering.value,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def naive_estimate(m: int, s: int) -> float:
    """Unadjusted terminal estimate s/m."""
    return s / m


def bias_function(dist: SamplingDistribution, p: float) -> float:
    """Exact bias of the naive estimate at true rate p: E[S/M | p] - p."""
    return expected_naive_estimate(dist, p) - p


def bias_adjusted_estimate(
    dist: SamplingDistribution,
    m: int,
    s: int,
    mode: AdjustMode = AdjustMode.PLUG_IN,
    tol: float = 1e-8,
) -> float:
    """Bias-adjusted estimate at the terminal state (m, s).

    Plug-in mode subtracts the bias evaluated at the naive estimate.
    Root-solve mode instead finds the rate whose expected naive estimate
    equals the observed one, i.e. solves p + B(p) = s/m by bisection.
    Both are clamped to [0, 1].
    """
    dist.order_index(m, s)
    target = naive_estimate(m, s)
    if mode is AdjustMode.PLUG_IN:
        return min(1.0, max(0.0, target - bias_function(dist, target)))
    lo, hi = 0.0, 1.0
    g = lambda p: p + bias_function(dist, p) - target
    if g(lo) >= 0.0:
        return 0.0
    if g(hi) <= 0.0:
        return 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if g(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _tail_indicator(dist: SamplingDistribution, m: int, s: int,
                    ordering: Ordering, strict: bool) -> np.ndarray:
    """Mask of support outcomes ranking at least (or strictly above) (m, s)."""
    idx = dist.order_index(m, s)
    if ordering is Ordering.STAGE_WISE:
        positions = np.arange(len(dist))
        return positions > idx if strict else positions >= idx
    s_values = dist._s
    return s_values > s if strict else s_values >= s


def pvalue_P(dist: SamplingDistribution, m: int, s: int, p: float,
             ordering: Ordering = Ordering.STAGE_WISE) -> float:
    """Probability of an outcome at least as favorable as (m, s) under p.

    Nondecreasing in p for every terminal state; equals 1 identically at
    the least element of the ordering.
    """
    mask = _tail_indicator(dist, m, s, ordering, strict=False)
    return float(dist.pmf_vector(p)[mask].sum())


def pvalue_Q(dist: SamplingDistribution, m: int, s: int, p: float,
             ordering: Ordering = Ordering.STAGE_WISE) -> float:
    """Probability of an outcome strictly more favorable than (m, s) under p.

    Differs from :func:`pvalue_P` exactly by the mass of the equality
    class at (m, s); identically 0 at the greatest element.
    """
    mask = _tail_indicator(dist, m, s, ordering, strict=True)
    return float(dist.pmf_vector(p)[mask].sum())


def _grid_half_crossing(fn: Callable[[float], float], step: float) -> float:
    """Where a nondecreasing function crosses 0.5 on the grid {0, step, .., 1}.

    Returns the midpoint of the bracketing grid interval; clamps to 0 when
    the function already exceeds 0.5 at p=0 and to 1 when it never reaches
    0.5.  The crossing index is located by bisection over the grid.
    """
    if fn(0.0) >= 0.5:
        return 0.0
    if fn(1.0) < 0.5:
        return 1.0
    n = round(1.0 / step)
    lo, hi = 0, n
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if fn(mid * step) < 0.5:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi) * step


def mue(dist: SamplingDistribution, m: int, s: int,
        ordering: Ordering = Ordering.STAGE_WISE,
        step: float = 0.0001) -> tuple[float, float, float]:
    """Median unbiased estimate at (m, s) with its two defining roots.

    The lower root solves P(p) = 0.5 and the upper root Q(p) = 0.5, both
    located on a grid of spacing ``step``; the estimate is their midpoint.

    Returns:
        (estimate, lower_root, upper_root)
    """
    lower = _grid_half_crossing(lambda p: pvalue_P(dist, m, s, p, ordering), step)
    upper = _grid_half_crossing(lambda p: pvalue_Q(dist, m, s, p, ordering), step)
    return 0.5 * (lower + upper), lower, upper


def estimate_report(dist: SamplingDistribution, m: int, s: int,
                    ordering: Ordering = Ordering.STAGE_WISE,
                    adjust_mode: AdjustMode = AdjustMode.PLUG_IN,
                    step: float = 0.0001) -> EstimateReport:
    """All point estimates at the terminal state (m, s)."""
    point, lower, upper = mue(dist, m, s, ordering, step)
    return EstimateReport(
        naive=naive_estimate(m, s),
        bias_adjusted=bias_adjusted_estimate(dist, m, s, adjust_mode),
        mue=point,
        mue_lower=lower,
        mue_upper=upper,
        ordering=ordering,
    )
