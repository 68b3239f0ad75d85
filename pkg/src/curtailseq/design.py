"""Exact sequential single-arm design with a fixed efficacy threshold.

The trial is monitored after every patient.  The cumulative responder
count stops the trial for efficacy the moment it reaches the threshold
``u``, and stops it for futility the moment ``u`` becomes unreachable
even if every remaining patient responds (deterministic curtailment).
Because the efficacy stop is a first passage to ``u`` successes, all
error rates are exact negative binomial tail sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum


class StageDecision(Enum):
    """Monitoring decision after a patient's response status is known."""

    CONTINUE = "continue"
    STOP_EFFICACY = "stop_efficacy"
    STOP_FUTILITY = "stop_futility"


class DesignSearchError(RuntimeError):
    """No feasible design exists below the search caps."""


@dataclass(frozen=True)
class Hypotheses:
    """One-sided testing problem for a binary response rate.

    Args:
        p0: Null (uninteresting) response rate.
        p1: Expected response rate under the alternative.
        alpha_nom: Nominal one-sided type I error level.
        beta_nom: Nominal type II error level (1 - target power).
    """

    p0: float
    p1: float
    alpha_nom: float = 0.025
    beta_nom: float = 0.2

    def __post_init__(self):
        if not 0.0 < self.p0 < 1.0 or not 0.0 < self.p1 < 1.0:
            raise ValueError("response rates must lie strictly between 0 and 1")
        if self.p0 >= self.p1:
            raise ValueError("p0 must be < p1")
        if not 0.0 < self.alpha_nom < 1.0:
            raise ValueError("alpha_nom must lie strictly between 0 and 1")
        if not 0.0 < self.beta_nom < 1.0:
            raise ValueError("beta_nom must lie strictly between 0 and 1")

    def to_dict(self) -> dict:
        return {
            "p0": self.p0,
            "p1": self.p1,
            "alpha": self.alpha_nom,
            "beta": self.beta_nom,
        }


def futility_boundaries(u: int, K: int) -> tuple[int, ...]:
    """Stage-wise futility bounds l_1..l_K for threshold ``u`` and maximum size ``K``.

    The bound at the final stage is ``u - 1`` and each earlier stage is one
    lower, so ``l_k = u - 1 - (K - k)``.  Negative values mean a futility
    stop is impossible at that stage and are kept as is.
    """
    _check_u_K(u, K)
    return tuple(u - 1 - (K - k) for k in range(1, K + 1))


@dataclass(frozen=True)
class Design:
    """A sequential design: efficacy threshold, maximum size, futility bounds.

    ``l`` holds the futility bounds for stages 1..K (index 0 is stage 1);
    use :meth:`futility_bound` for one-based access.  ``hypotheses``,
    ``alpha_actual`` and ``power`` are attached when the design was built
    for a concrete testing problem.
    """

    u: int
    K: int
    l: tuple[int, ...]
    hypotheses: Hypotheses | None = None
    alpha_actual: float | None = None
    power: float | None = None

    def __post_init__(self):
        _check_u_K(self.u, self.K)
        if tuple(self.l) != futility_boundaries(self.u, self.K):
            raise ValueError("futility bounds do not follow the curtailment recursion")
        object.__setattr__(self, "l", tuple(self.l))

    @classmethod
    def from_thresholds(cls, u: int, K: int, hypotheses: Hypotheses | None = None) -> "Design":
        """Build a design from (u, K), deriving bounds and, when hypotheses are
        given, the exact operating characteristics."""
        l = futility_boundaries(u, K)
        if hypotheses is None:
            return cls(u=u, K=K, l=l)
        oc = operating_characteristics(u, K, hypotheses)
        return oc.design

    def futility_bound(self, k: int) -> int:
        """Futility bound at stage ``k`` (1-based)."""
        if not 1 <= k <= self.K:
            raise ValueError(f"stage k={k} outside 1..{self.K}")
        return self.l[k - 1]

    def first_futility_stage(self) -> int:
        """Earliest stage at which a futility stop is possible (bound >= 0)."""
        return self.K - self.u + 1

    def to_dict(self) -> dict:
        """Canonical JSON document shared by every downstream consumer."""
        if self.hypotheses is None:
            raise ValueError("design carries no hypotheses; cannot serialize the full document")
        doc = self.hypotheses.to_dict()
        doc.update(
            {
                "u": self.u,
                "K": self.K,
                "l": list(self.l),
                "alpha_actual": self.alpha_actual,
                "power": self.power,
            }
        )
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "Design":
        hyp = Hypotheses(doc["p0"], doc["p1"], doc["alpha"], doc["beta"])
        return cls(
            u=int(doc["u"]),
            K=int(doc["K"]),
            l=tuple(int(x) for x in doc["l"]),
            hypotheses=hyp,
            alpha_actual=doc.get("alpha_actual"),
            power=doc.get("power"),
        )

    @classmethod
    def from_json(cls, text: str) -> "Design":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class OperatingCharacteristics:
    """Exact type I error and power of a design at its stated hypotheses."""

    alpha_actual: float
    power: float
    design: Design


@dataclass(frozen=True)
class DesignSearch:
    """Result of the grid search: the selected design plus the range of
    maximum sample sizes that keep both error rates within their nominal
    levels (enrollment may overshoot up to ``k_max``)."""

    design: Design
    feasible_k: tuple[int, ...]
    k_max: int


def _check_u_K(u: int, K: int) -> None:
    if u < 1 or K < u:
        raise ValueError(f"need 1 <= u <= K, got u={u}, K={K}")


def nb_pmf(s: int, k: int, p: float) -> float:
    """Probability that the s-th response arrives exactly with patient k.

    This is the negative binomial mass C(k-1, s-1) p^s (1-p)^(k-s),
    evaluated through log factorials so large k stay finite.

    Args:
        s: Number of responses accumulated at the stop (1 <= s <= k).
        k: Patient index at which the s-th response occurs.
        p: True response probability.

    Raises:
        ValueError: If s is outside 1..k or p outside [0, 1].
    """
    if s < 1 or s > k:
        raise ValueError(f"need 1 <= s <= k, got s={s}, k={k}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p={p} outside [0, 1]")
    if p == 0.0:
        return 0.0
    if p == 1.0:
        return 1.0 if s == k else 0.0
    log_comb = math.lgamma(k) - math.lgamma(s) - math.lgamma(k - s + 1)
    return math.exp(log_comb + s * math.log(p) + (k - s) * math.log1p(-p))


def stopping_probability_sum(u: int, K: int, p: float) -> float:
    """Probability of ever reaching ``u`` responders within ``K`` patients."""
    _check_u_K(u, K)
    return sum(nb_pmf(u, k, p) for k in range(u, K + 1))


def operating_characteristics(u: int, K: int, hyp: Hypotheses) -> OperatingCharacteristics:
    """Exact error rate and power of the design (u, K) under ``hyp``.

    Both are tail sums of the first-passage distribution: the type I rate
    accumulates the efficacy-stop probabilities under p0, the power does
    the same under p1.
    """
    alpha = stopping_probability_sum(u, K, hyp.p0)
    power = stopping_probability_sum(u, K, hyp.p1)
    design = Design(
        u=u,
        K=K,
        l=futility_boundaries(u, K),
        hypotheses=hyp,
        alpha_actual=alpha,
        power=power,
    )
    return OperatingCharacteristics(alpha_actual=alpha, power=power, design=design)


def search_design(hyp: Hypotheses, u_cap: int = 200, k_cap: int | None = None) -> DesignSearch:
    """Grid search for the smallest design meeting both nominal levels.

    Starting from u = 1, each threshold is scanned over K >= u.  The error
    rate grows with K while power does too, so for a fixed u the admissible
    region is an interval: K small enough to hold the error rate, large
    enough to reach the power target.  The first u with a nonempty interval
    wins, K is its minimum, and ``k_max`` reports how far enrollment may
    overshoot while the error rate still holds.

    Args:
        hyp: Testing problem with nominal levels.
        u_cap: Abort threshold for u.
        k_cap: Upper bound for the K scan; defaults to ten times the
            score-formula sample size.

    Raises:
        DesignSearchError: If no pair (u, K) is feasible below the caps.
    """
    if k_cap is None:
        from .comparators import score_sample_size

        k_cap = 10 * score_sample_size(hyp)
    for u in range(1, u_cap + 1):
        alpha = 0.0
        power = 0.0
        k_alpha_max = None
        k_power_min = None
        for K in range(u, k_cap + 1):
            alpha += nb_pmf(u, K, hyp.p0)
            power += nb_pmf(u, K, hyp.p1)
            if alpha > hyp.alpha_nom:
                break
            k_alpha_max = K
            if k_power_min is None and power >= 1.0 - hyp.beta_nom:
                k_power_min = K
        if k_alpha_max is not None and k_power_min is not None:
            oc = operating_characteristics(u, k_power_min, hyp)
            return DesignSearch(
                design=oc.design,
                feasible_k=tuple(range(k_power_min, k_alpha_max + 1)),
                k_max=k_alpha_max,
            )
    raise DesignSearchError(
        f"no feasible (u, K) with u <= {u_cap} and K <= {k_cap} for {hyp}"
    )


def classify_state(design: Design, k: int, s: int) -> StageDecision:
    """Monitoring decision at stage ``k`` with ``s`` responders so far.

    Raises:
        ValueError: If k is outside 1..K or s outside 0..k.
    """
    if not 1 <= k <= design.K:
        raise ValueError(f"stage k={k} outside 1..{design.K}")
    if s < 0 or s > k:
        raise ValueError(f"responder count s={s} outside 0..{k}")
    if s >= design.u:
        return StageDecision.STOP_EFFICACY
    if s <= design.futility_bound(k):
        return StageDecision.STOP_FUTILITY
    return StageDecision.CONTINUE
