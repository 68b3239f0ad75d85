"""Reference designs for benchmarking the sequential design.

Covers the exact fixed-sample design (robust to the discreteness
sawtooth in power), the classical two-stage design under the minimax
and optimal criteria, the closed-form normal-approximation sample
sizes, and the adjusted test statistic that stays finite when every
patient responds.
"""

from __future__ import annotations

import csv
import io
import math
from collections import namedtuple
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.stats import binom, norm

from .design import DesignSearchError, Hypotheses


@dataclass(frozen=True)
class FixedDesign:
    """Single-stage exact design: reject the null iff responders >= r of N."""

    N: int
    r: int

    def to_dict(self) -> dict:
        return {"N": self.N, "r": self.r}


@dataclass(frozen=True)
class SimonDesign:
    """Two-stage design: stop for futility after n1 patients iff responses
    <= r1, otherwise continue to n and reject the null iff responses > r."""

    n1: int
    r1: int
    n: int
    r: int
    criterion: str  # "minimax" or "optimal"

    def to_dict(self) -> dict:
        return {"n1": self.n1, "r1": self.r1, "n": self.n, "r": self.r,
                "criterion": self.criterion}


SimonCharacteristics = namedtuple("SimonCharacteristics", ["pet", "asn", "power"])


def wald_sample_size(hyp: Hypotheses) -> int:
    """Normal-approximation size using only the alternative's variance."""
    za = norm.ppf(1.0 - hyp.alpha_nom)
    zb = norm.ppf(1.0 - hyp.beta_nom)
    n = (za + zb) ** 2 * hyp.p1 * (1.0 - hyp.p1) / (hyp.p1 - hyp.p0) ** 2
    return math.ceil(n)


def score_sample_size(hyp: Hypotheses) -> int:
    """Normal-approximation size combining null and alternative variances."""
    za = norm.ppf(1.0 - hyp.alpha_nom)
    zb = norm.ppf(1.0 - hyp.beta_nom)
    num = za * math.sqrt(hyp.p0 * (1.0 - hyp.p0)) + zb * math.sqrt(hyp.p1 * (1.0 - hyp.p1))
    return math.ceil((num / (hyp.p1 - hyp.p0)) ** 2)


def agresti_coull_z(k: int, s: int, p0: float, z_alpha: float) -> float:
    """Wald-type statistic with the center-shrunk proportion.

    The plain statistic degenerates when s = k (zero estimated variance);
    shrinking the estimate toward 1/2 keeps it finite for every outcome.
    """
    if k < 1 or not 0 <= s <= k:
        raise ValueError(f"need k >= 1 and 0 <= s <= k, got k={k}, s={s}")
    p_hat = s / k
    shrink = k / (k + z_alpha ** 2)
    p_tilde = p_hat * shrink + 0.5 * (1.0 - shrink)
    return math.sqrt(k) * (p_tilde - p0) / math.sqrt(p_tilde * (1.0 - p_tilde))


def _minimal_threshold(N: int, p0: float, alpha: float) -> int:
    """Smallest rejection threshold r with Pr[Bin(N, p0) >= r] <= alpha."""
    r = int(binom.isf(alpha, N, p0)) + 1
    while r > 0 and binom.sf(r - 2, N, p0) <= alpha:
        r -= 1
    while binom.sf(r - 1, N, p0) > alpha:
        r += 1
    return r


def fixed_exact_design(hyp: Hypotheses, settle: int = 60, n_cap: int = 4000) -> FixedDesign:
    """Exact single-stage design robust to the power sawtooth.

    Power at the minimal admissible threshold is not monotone in N, so the
    returned N is the smallest size from which the power target holds for
    every larger size, verified over ``settle`` consecutive sizes.

    Raises:
        DesignSearchError: If no such N exists below ``n_cap``.
    """
    target = 1.0 - hyp.beta_nom
    last_bad, streak, N = 0, 0, 0
    while streak < settle:
        N += 1
        if N > n_cap:
            raise DesignSearchError(f"no settled fixed design with N <= {n_cap}")
        r = _minimal_threshold(N, hyp.p0, hyp.alpha_nom)
        if binom.sf(r - 1, N, hyp.p1) < target:
            last_bad, streak = N, 0
        else:
            streak += 1
    N = max(last_bad + 1, 1)
    return FixedDesign(N=N, r=_minimal_threshold(N, hyp.p0, hyp.alpha_nom))


def fixed_characteristics(design: FixedDesign, p: float) -> float:
    """Rejection probability of the fixed design at response rate p."""
    return float(binom.sf(design.r - 1, design.N, p))


def simon_characteristics(design: SimonDesign, p: float) -> SimonCharacteristics:
    """Early-termination probability, expected size and rejection
    probability of a two-stage design at response rate p."""
    n1, r1, n, r = design.n1, design.r1, design.n, design.r
    pet = float(binom.cdf(r1, n1, p))
    asn = n1 + (1.0 - pet) * (n - n1)
    x = np.arange(r1 + 1, n1 + 1)
    tail2 = np.where(r - x < 0, 1.0, binom.sf(np.maximum(r - x, 0), n - n1, p))
    power = float(binom.pmf(x, n1, p) @ tail2)
    return SimonCharacteristics(pet=pet, asn=asn, power=power)


def _stage1_feasibility_cap(n1: int, p0: float, p1: float, beta: float) -> float | None:
    """Largest stage-1 stop probability under p0 compatible with the power
    target, or None when no stage-1 rule is compatible at this n1."""
    r1 = int(binom.ppf(beta, n1, p1))
    while r1 >= 0 and binom.cdf(r1, n1, p1) > beta:
        r1 -= 1
    if r1 < 0:
        return None
    return float(binom.cdf(r1, n1, p0))


def _scan_single_n(n: int, p0: float, p1: float, alpha: float, beta: float):
    """Best feasible (asn, n1, r1, r) at maximum size n, or None."""
    best = None
    r_grid = np.arange(n + 1)
    sf_tot0 = binom.sf(r_grid, n, p0)
    sf_tot1 = binom.sf(r_grid, n, p1)
    for n1 in range(1, n):
        n2 = n - n1
        j = np.arange(n1 + 1)
        b0 = binom.pmf(j, n1, p0)
        b1 = binom.pmf(j, n1, p1)
        y = np.arange(-n1, n + 1)
        s2_0 = np.where(y < 0, 1.0, binom.sf(np.maximum(y, 0), n2, p0))
        s2_1 = np.where(y < 0, 1.0, binom.sf(np.maximum(y, 0), n2, p1))
        idx = r_grid[None, :] - j[:, None] + n1
        # type I and power restricted to stage-2 continuation, all r1 at once
        T0 = sf_tot0[None, :] - np.cumsum(b0[:, None] * s2_0[idx], axis=0)[:-1]
        T1 = sf_tot1[None, :] - np.cumsum(b1[:, None] * s2_1[idx], axis=0)[:-1]
        ok = T0 <= alpha
        ok &= r_grid[None, :] > np.arange(n1)[:, None]  # require r > r1
        has = ok.any(axis=1)
        if not has.any():
            continue
        r_star = np.argmax(ok, axis=1)
        power = T1[np.arange(n1), r_star]
        pet0 = binom.cdf(np.arange(n1), n1, p0)
        asn = n1 + (1.0 - pet0) * n2
        for r1 in np.flatnonzero(has & (power >= 1.0 - beta)):
            cand = (float(asn[r1]), n1, int(r1), int(r_star[r1]))
            if best is None or cand[0] < best[0]:
                best = cand
    return best


@lru_cache(maxsize=None)
def _simon_scan(p0: float, p1: float, alpha: float, beta: float,
                n_cap: int) -> tuple[SimonDesign, SimonDesign]:
    """Exhaustive search returning the minimax and optimal designs together.

    The scan over n stops once no larger n can beat the best expected size,
    using a lower bound on the expected size from the stage-1 feasibility
    cap (valid because the bound grows with n).
    """
    minimax = None
    best = None  # (asn, n1, r1, r, n)
    for n in range(2, n_cap + 1):
        if best is not None:
            caps = [_stage1_feasibility_cap(n1, p0, p1, beta) for n1 in range(1, n)]
            lbs = [n1 + (1.0 - g) * (n - n1)
                   for n1, g in zip(range(1, n), caps) if g is not None]
            if lbs and min(lbs) > best[0]:
                break
        found = _scan_single_n(n, p0, p1, alpha, beta)
        if found is None:
            continue
        asn, n1, r1, r = found
        if minimax is None:
            minimax = SimonDesign(n1=n1, r1=r1, n=n, r=r, criterion="minimax")
        if best is None or asn < best[0]:
            best = (asn, n1, r1, r, n)
    if minimax is None or best is None:
        raise DesignSearchError(f"no feasible two-stage design with n <= {n_cap}")
    optimal = SimonDesign(n1=best[1], r1=best[2], n=best[4], r=best[3],
                          criterion="optimal")
    return minimax, optimal


def simon_search(hyp: Hypotheses, criterion: str = "minimax",
                 n_cap: int | None = None) -> SimonDesign:
    """Two-stage design minimizing either the maximum size (minimax) or the
    expected size under the null (optimal).

    Ties are broken toward smaller n, then smaller n1, then smaller r1.
    """
    if criterion not in ("minimax", "optimal"):
        raise ValueError(f"criterion must be 'minimax' or 'optimal', got {criterion!r}")
    if n_cap is None:
        n_cap = 3 * score_sample_size(hyp)
    minimax, optimal = _simon_scan(hyp.p0, hyp.p1, hyp.alpha_nom, hyp.beta_nom, n_cap)
    return minimax if criterion == "minimax" else optimal


def table2_rows(hyp: Hypotheses) -> tuple[list[str], list[list]]:
    """Threshold layout across enrollment for every design, as a header row
    of stage numbers plus one labeled row per boundary."""
    from .design import search_design

    proposed = search_design(hyp).design
    fixed = fixed_exact_design(hyp)
    minimax = simon_search(hyp, "minimax")
    optimal = simon_search(hyp, "optimal")
    k_max = max(proposed.K, fixed.N, minimax.n, optimal.n)
    header = ["design"] + [str(k) for k in range(1, k_max + 1)]

    def blank_row(label):
        return [label] + [""] * k_max

    u_row = blank_row("proposed_u")
    for k in range(proposed.u, proposed.K + 1):
        u_row[k] = proposed.u
    l_row = blank_row("proposed_l")
    for k in range(1, proposed.K + 1):
        lk = proposed.futility_bound(k)
        if lk >= 0:
            l_row[k] = lk
    f_row = blank_row("fixed")
    f_row[fixed.N] = fixed.r
    mm_row = blank_row("simon_minimax")
    mm_row[minimax.n1] = minimax.r1
    mm_row[minimax.n] = minimax.r
    op_row = blank_row("simon_optimal")
    op_row[optimal.n1] = optimal.r1
    op_row[optimal.n] = optimal.r
    return header, [u_row, l_row, f_row, mm_row, op_row]


def table2_csv(hyp: Hypotheses) -> str:
    header, rows = table2_rows(hyp)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()
