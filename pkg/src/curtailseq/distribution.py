"""Exact distribution of the trial's terminal state (stage, responders).

The pair (M, S) at which monitoring stops has a discrete distribution
f(m, s | p) = c * p^s * (1-p)^(m-s), where c counts the response
sequences that first hit the stopping boundary at (m, s).  The counts
come from a lattice recursion over the continuation states, so nothing
exponential is ever enumerated; an explicit all-sequences oracle is kept
alongside for validation on small designs.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .design import Design, StageDecision, classify_state


class StopKind(Enum):
    EFFICACY = "efficacy"
    FUTILITY = "futility"


@dataclass(frozen=True)
class TerminalOutcome:
    """A stopping point: stage m, responder count s, and its path count."""

    m: int
    s: int
    kind: StopKind
    path_count: int


class SamplingDistribution:
    """Terminal distribution of a design, with the support held in
    stage-wise order: futility stops by ascending stage, then efficacy
    stops by descending stage (worst outcome first, best last).

    Instances are immutable after construction and safe to share.
    """

    def __init__(self, design: Design, support: tuple[TerminalOutcome, ...],
                 continuation_counts: dict[tuple[int, int], int]):
        self.design = design
        self.support = support
        self.continuation_counts = continuation_counts
        self._index = {(o.m, o.s): i for i, o in enumerate(support)}
        self._m = np.array([o.m for o in support], dtype=float)
        self._s = np.array([o.s for o in support], dtype=float)
        self._log_c = np.array([math.log(o.path_count) for o in support])
        self._efficacy = np.array([o.kind is StopKind.EFFICACY for o in support])
        self._cache: dict = {}

    def __len__(self) -> int:
        return len(self.support)

    def order_index(self, m: int, s: int) -> int:
        """Position of (m, s) in the stage-wise ordering."""
        try:
            return self._index[(m, s)]
        except KeyError:
            raise ValueError(f"({m}, {s}) is not a terminal state of this design") from None

    def outcome(self, m: int, s: int) -> TerminalOutcome:
        return self.support[self.order_index(m, s)]

    def pmf_vector(self, p: float) -> np.ndarray:
        """f(m, s | p) over the whole support, in support order."""
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p={p} outside [0, 1]")
        if p == 0.0:
            return np.where(self._s == 0, 1.0, 0.0)
        if p == 1.0:
            return np.where(self._m == self._s, 1.0, 0.0)
        return np.exp(self._log_c + self._s * math.log(p) + (self._m - self._s) * math.log1p(-p))

    def pmf(self, m: int, s: int, p: float) -> float:
        return float(self.pmf_vector(p)[self.order_index(m, s)])


def build_distribution(design: Design) -> SamplingDistribution:
    """Enumerate the terminal support of ``design`` with exact path counts.

    Continuation states (k, s) satisfy l_k < s < u; their path counts obey
    N(k, s) = N(k-1, s) + N(k-1, s-1) starting from N(0, 0) = 1.  An
    efficacy stop at stage m is entered by a response from (m-1, u-1) and
    a futility stop by a non-response from (m-1, l_m), which is a
    continuation state because l_{m-1} = l_m - 1.  Counts are exact
    arbitrary-precision integers.
    """
    u, K = design.u, design.K
    counts: dict[tuple[int, int], int] = {(0, 0): 1}
    for k in range(1, K + 1):
        lo = max(0, design.futility_bound(k) + 1)
        hi = min(k, u - 1)
        for s in range(lo, hi + 1):
            n = counts.get((k - 1, s), 0) + counts.get((k - 1, s - 1), 0)
            if n:
                counts[(k, s)] = n
    support: list[TerminalOutcome] = []
    for m in range(design.first_futility_stage(), K + 1):
        lm = design.futility_bound(m)
        if lm < 0:
            continue
        c = counts.get((m - 1, lm), 0)
        if c:
            support.append(TerminalOutcome(m, lm, StopKind.FUTILITY, c))
    for m in range(K, u - 1, -1):
        c = counts.get((m - 1, u - 1), 0)
        if c:
            support.append(TerminalOutcome(m, u, StopKind.EFFICACY, c))
    del counts[(0, 0)]
    return SamplingDistribution(design, tuple(support), counts)


def terminal_pmf(dist: SamplingDistribution, m: int, s: int, p: float) -> float:
    """Exact stopping probability at (m, s) under response rate p."""
    return dist.pmf(m, s, p)


def stagewise_compare(dist: SamplingDistribution, a: TerminalOutcome, b: TerminalOutcome) -> int:
    """Total order on terminal outcomes: -1, 0 or 1 as a precedes, equals
    or follows b.  Futility stops rank below every efficacy stop; among
    futility stops earlier stages rank lower, among efficacy stops later
    stages rank lower.

    Raises:
        ValueError: If either outcome does not belong to ``dist``.
    """
    ia = dist.order_index(a.m, a.s)
    ib = dist.order_index(b.m, b.s)
    return (ia > ib) - (ia < ib)


def expectation(dist: SamplingDistribution, p: float, g: Callable[[int, int], float]) -> float:
    """E[g(M, S) | p] by direct summation over the support."""
    values = np.array([g(o.m, o.s) for o in dist.support])
    return float(values @ dist.pmf_vector(p))


def expected_sample_size(dist: SamplingDistribution, p: float) -> float:
    """Average number of patients enrolled when the trial stops."""
    return float(dist._m @ dist.pmf_vector(p))


def exact_power(dist: SamplingDistribution, p: float) -> float:
    """Probability of stopping for efficacy under response rate p."""
    return float(dist.pmf_vector(p)[dist._efficacy].sum())


def expected_naive_estimate(dist: SamplingDistribution, p: float) -> float:
    """E[S / M | p], the mean of the unadjusted terminal estimate."""
    return float((dist._s / dist._m) @ dist.pmf_vector(p))


MAX_ORACLE_K = 20


def brute_force_oracle(design: Design, p: float) -> dict[tuple[int, int], float]:
    """Stopping probabilities by enumerating every response sequence.

    Walks all 2^K binary sequences through the monitoring rule and
    accumulates each full sequence's probability at its stopping state.
    Only intended as an independent check of the lattice recursion.

    Raises:
        ValueError: If design.K exceeds the enumeration bound.
    """
    K = design.K
    if K > MAX_ORACLE_K:
        raise ValueError(f"K={K} exceeds the enumeration bound {MAX_ORACLE_K}")
    probs: dict[tuple[int, int], float] = {}
    for bits in range(1 << K):
        s = 0
        m = K
        for k in range(1, K + 1):
            s += (bits >> (k - 1)) & 1
            if classify_state(design, k, s) is not StageDecision.CONTINUE:
                m = k
                break
        total = bits.bit_count()
        mass = p ** total * (1.0 - p) ** (K - total)
        probs[(m, s)] = probs.get((m, s), 0.0) + mass
    return probs


def support_table(dist: SamplingDistribution, p_values: Iterable[float] = ()) -> list[dict]:
    """Rows describing the support, optionally with pmf columns at given p."""
    p_values = list(p_values)
    rows = []
    vectors = {p: dist.pmf_vector(p) for p in p_values}
    for i, o in enumerate(dist.support):
        row = {"m": o.m, "s": o.s, "kind": o.kind.value, "c_ms": o.path_count}
        for p in p_values:
            row[f"f_at_{p:g}"] = float(vectors[p][i])
        rows.append(row)
    return rows


def write_support_csv(dist: SamplingDistribution, path: str, p_values: Iterable[float] = ()) -> None:
    rows = support_table(dist, p_values)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)
