"""Operating characteristics and estimator performance across scenarios.

Every measure has two evaluation routes: exact summation over the
terminal support (no replication noise) and Monte Carlo with a
counter-based generator whose substreams are keyed by scenario and
replication block, so serial and parallel runs produce identical rows.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .comparators import (
    FixedDesign,
    SimonDesign,
    fixed_characteristics,
    fixed_exact_design,
    simon_characteristics,
    simon_search,
)
from .design import Design, Hypotheses, search_design
from .distribution import (
    SamplingDistribution,
    TerminalOutcome,
    build_distribution,
    exact_power,
    expected_sample_size,
)
from .estimation import AdjustMode, Ordering, bias_adjusted_estimate, mue
from .intervals import METHODS, support_intervals

ESTIMATORS = ("naive", "adjusted", "mue")

DEFAULT_OC_REPS = 100_000
DEFAULT_EST_REPS = 10_000


@dataclass(frozen=True)
class ScenarioGrid:
    """Evaluation grid: true rates to sweep and testing problems to design for."""

    p_true: tuple[float, ...]
    hypothesis_pairs: tuple[tuple[float, float], ...]
    alpha_nom: float = 0.025
    power_nom: float = 0.8

    @classmethod
    def default(cls) -> "ScenarioGrid":
        """True rate 0.05..0.60 by 0.05; null rates 0.1..0.3 by 0.1 paired
        with expected rates 0.25..0.50 by 0.05 at least 0.15 above the null
        (the twelve benchmark pairs)."""
        p_true = tuple(round(0.05 * i, 2) for i in range(1, 13))
        pairs = tuple(
            (round(p0, 2), round(p1, 2))
            for p0 in (0.1, 0.2, 0.3)
            for p1 in (0.25, 0.3, 0.35, 0.4, 0.45, 0.5)
            if round(p1 - p0, 10) >= 0.15
        )
        return cls(p_true=p_true, hypothesis_pairs=pairs)

    def hypotheses(self) -> list[Hypotheses]:
        return [
            Hypotheses(p0, p1, self.alpha_nom, 1.0 - self.power_nom)
            for p0, p1 in self.hypothesis_pairs
        ]


@dataclass
class PerformanceRow:
    """One design evaluated at one true rate."""

    design: str
    hypotheses: str
    p_true: float
    mode: str  # "exact" or "montecarlo"
    n_rep: int | None = None
    seed: int | None = None
    power: float | None = None
    asn: float | None = None
    bias: dict[str, float] = field(default_factory=dict)
    rmse: dict[str, float] = field(default_factory=dict)
    coverage: dict[str, float] = field(default_factory=dict)
    length: dict[str, float] = field(default_factory=dict)


_METHOD_TAGS = tuple(m.replace("-", "_") for m in METHODS)

CSV_COLUMNS = (
    ["design", "hypotheses", "p_true", "mode", "n_rep", "seed", "power", "asn"]
    + [f"bias_{e}" for e in ESTIMATORS]
    + [f"rmse_{e}" for e in ESTIMATORS]
    + [f"coverage_{t}" for t in _METHOD_TAGS]
    + [f"length_{t}" for t in _METHOD_TAGS]
)


def _flatten(row: PerformanceRow) -> dict:
    flat = {
        "design": row.design,
        "hypotheses": row.hypotheses,
        "p_true": row.p_true,
        "mode": row.mode,
        "n_rep": "" if row.n_rep is None else row.n_rep,
        "seed": "" if row.seed is None else row.seed,
        "power": "" if row.power is None else repr(row.power),
        "asn": "" if row.asn is None else repr(row.asn),
    }
    for e in ESTIMATORS:
        flat[f"bias_{e}"] = "" if e not in row.bias else repr(row.bias[e])
        flat[f"rmse_{e}"] = "" if e not in row.rmse else repr(row.rmse[e])
    for mth, tag in zip(METHODS, _METHOD_TAGS):
        flat[f"coverage_{tag}"] = "" if mth not in row.coverage else repr(row.coverage[mth])
        flat[f"length_{tag}"] = "" if mth not in row.length else repr(row.length[mth])
    return flat


def _substream(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator on an independent substream."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(ss))


def simulate_trial(dist: SamplingDistribution, p: float,
                   rng: np.random.Generator) -> TerminalOutcome:
    """Run one trial patient by patient and return its terminal state."""
    design = dist.design
    l = design.l
    s = 0
    for k in range(1, design.K + 1):
        s += int(rng.random() < p)
        if s >= design.u or s <= l[k - 1]:
            return dist.outcome(k, s)
    raise AssertionError("monitoring rule failed to stop by stage K")


def _simulate_terminal_block(design: Design, p: float, n: int,
                             rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized terminal states (m, s) of ``n`` independent trials."""
    draws = rng.random((n, design.K)) < p
    running = np.cumsum(draws, axis=1)
    bounds = np.array(design.l)
    stop = (running >= design.u) | (running <= bounds)
    first = np.argmax(stop, axis=1)
    s = running[np.arange(n), first]
    return first + 1, s


def _mc_terminal_sample(design: Design, p: float, n_rep: int, seed: int,
                        p_index: int, block: int = 10_000) -> tuple[np.ndarray, np.ndarray]:
    ms, ss = [], []
    n_blocks = math.ceil(n_rep / block)
    for b in range(n_blocks):
        size = min(block, n_rep - b * block)
        rng = _substream(seed, p_index, b)
        m, s = _simulate_terminal_block(design, p, size, rng)
        ms.append(m)
        ss.append(s)
    return np.concatenate(ms), np.concatenate(ss)


def _label(obj) -> str:
    if isinstance(obj, Design):
        return "proposed"
    if isinstance(obj, FixedDesign):
        return "fixed"
    if isinstance(obj, SimonDesign):
        return f"simon_{obj.criterion}"
    raise TypeError(f"unsupported design type {type(obj).__name__}")


def _hyp_label(hyp: Hypotheses | None) -> str:
    if hyp is None:
        return ""
    return f"p0={hyp.p0:g},p1={hyp.p1:g}"


def evaluate_oc(design, p_values, mode: str = "exact",
                n_rep: int = DEFAULT_OC_REPS, seed: int = 0,
                hypotheses: Hypotheses | None = None) -> list[PerformanceRow]:
    """Power and average sample size of a design across true rates.

    Accepts the sequential design or either comparator.  Exact mode sums
    over the terminal support (or uses closed binomial forms); Monte Carlo
    mode replays ``n_rep`` trials per rate.
    """
    if mode not in ("exact", "montecarlo"):
        raise ValueError(f"mode must be 'exact' or 'montecarlo', got {mode!r}")
    label = _label(design)
    hyp = hypotheses or (design.hypotheses if isinstance(design, Design) else None)
    hl = _hyp_label(hyp)
    dist = build_distribution(design) if isinstance(design, Design) else None
    rows = []
    for pi, p in enumerate(p_values):
        row = PerformanceRow(design=label, hypotheses=hl, p_true=p, mode=mode)
        if mode == "exact":
            if isinstance(design, Design):
                row.power = exact_power(dist, p)
                row.asn = expected_sample_size(dist, p)
            elif isinstance(design, FixedDesign):
                row.power = fixed_characteristics(design, p)
                row.asn = float(design.N)
            else:
                pet, asn, power = simon_characteristics(design, p)
                row.power, row.asn = power, asn
        else:
            row.n_rep, row.seed = n_rep, seed
            if isinstance(design, Design):
                m, s = _mc_terminal_sample(design, p, n_rep, seed, pi)
                row.power = float(np.mean(s >= design.u))
                row.asn = float(np.mean(m))
            elif isinstance(design, FixedDesign):
                rng = _substream(seed, pi, 0)
                x = rng.binomial(design.N, p, size=n_rep)
                row.power = float(np.mean(x >= design.r))
                row.asn = float(design.N)
            else:
                rng = _substream(seed, pi, 0)
                x1 = rng.binomial(design.n1, p, size=n_rep)
                go_on = x1 > design.r1
                total = x1.astype(np.int64)
                total[go_on] += rng.binomial(design.n - design.n1, p, size=int(go_on.sum()))
                row.power = float(np.mean(go_on & (total > design.r)))
                row.asn = float(np.mean(np.where(go_on, design.n, design.n1)))
        rows.append(row)
    return rows


def _support_estimates(dist: SamplingDistribution, alpha: float,
                       adjust_mode: AdjustMode = AdjustMode.PLUG_IN):
    estimates = {
        "naive": np.array([o.s / o.m for o in dist.support]),
        "adjusted": np.array([
            bias_adjusted_estimate(dist, o.m, o.s, adjust_mode) for o in dist.support
        ]),
        "mue": np.array([
            mue(dist, o.m, o.s, Ordering.STAGE_WISE)[0] for o in dist.support
        ]),
    }
    bounds = {
        mth: np.array([[iv.lower, iv.upper] for iv in support_intervals(dist, mth, alpha)])
        for mth in METHODS
    }
    return estimates, bounds


def evaluate_estimation(design: Design, p_values, mode: str = "exact",
                        n_rep: int = DEFAULT_EST_REPS, seed: int = 0,
                        alpha: float | None = None,
                        adjust_mode: AdjustMode = AdjustMode.PLUG_IN) -> list[PerformanceRow]:
    """Bias and RMSE of the three point estimators plus coverage and
    expected length of the five interval methods, across true rates.

    Exact mode weights every terminal outcome by its probability, so the
    numbers carry no replication error; Monte Carlo mode resamples
    ``n_rep`` trials per rate.
    """
    if mode not in ("exact", "montecarlo"):
        raise ValueError(f"mode must be 'exact' or 'montecarlo', got {mode!r}")
    if alpha is None:
        alpha = design.hypotheses.alpha_nom if design.hypotheses else 0.025
    dist = build_distribution(design)
    estimates, bounds = _support_estimates(dist, alpha, adjust_mode)
    hl = _hyp_label(design.hypotheses)
    n = len(dist)
    eff = dist._efficacy
    m_arr, s_arr = dist._m, dist._s
    rows = []
    for pi, p in enumerate(p_values):
        row = PerformanceRow(design="proposed", hypotheses=hl, p_true=p, mode=mode)
        if mode == "exact":
            w = dist.pmf_vector(p)
        else:
            row.n_rep, row.seed = n_rep, seed
            m, s = _mc_terminal_sample(design, p, n_rep, seed, pi)
            lut = np.full((design.K + 1) * (design.K + 2), -1)
            for i, o in enumerate(dist.support):
                lut[o.m * (design.K + 2) + o.s] = i
            idx = lut[m * (design.K + 2) + s]
            w = np.bincount(idx, minlength=n) / n_rep
        row.power = float(w[eff].sum())
        row.asn = float(w @ m_arr)
        for name, est in estimates.items():
            err = est - p
            row.bias[name] = float(w @ err)
            row.rmse[name] = float(math.sqrt(w @ (err ** 2)))
        for mth in METHODS:
            lo, hi = bounds[mth][:, 0], bounds[mth][:, 1]
            inside = (lo <= p) & (p <= hi)
            row.coverage[mth] = float(w[inside].sum())
            row.length[mth] = float(w @ (hi - lo))
        rows.append(row)
    return rows


def compare_designs(hyp: Hypotheses, p_values=None, mode: str = "exact",
                    n_rep: int = DEFAULT_OC_REPS, seed: int = 0) -> list[PerformanceRow]:
    """Operating characteristics of the sequential design and all three
    comparators on a common rate grid."""
    if p_values is None:
        p_values = ScenarioGrid.default().p_true
    rows: list[PerformanceRow] = []
    proposed = search_design(hyp).design
    rows += evaluate_oc(proposed, p_values, mode, n_rep, seed)
    rows += evaluate_oc(fixed_exact_design(hyp), p_values, mode, n_rep, seed, hypotheses=hyp)
    rows += evaluate_oc(simon_search(hyp, "minimax"), p_values, mode, n_rep, seed, hypotheses=hyp)
    rows += evaluate_oc(simon_search(hyp, "optimal"), p_values, mode, n_rep, seed, hypotheses=hyp)
    return rows


def rows_to_csv(rows: list[PerformanceRow]) -> str:
    if not rows:
        raise ValueError("no rows to serialize")
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(CSV_COLUMNS), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(_flatten(row))
    return buf.getvalue()


def rows_from_csv(text: str) -> list[PerformanceRow]:
    """Inverse of :func:`rows_to_csv`."""
    reader = csv.DictReader(io.StringIO(text))
    rows = []
    for rec in reader:
        row = PerformanceRow(
            design=rec["design"],
            hypotheses=rec["hypotheses"],
            p_true=float(rec["p_true"]),
            mode=rec["mode"],
            n_rep=int(rec["n_rep"]) if rec["n_rep"] else None,
            seed=int(rec["seed"]) if rec["seed"] else None,
            power=float(rec["power"]) if rec["power"] else None,
            asn=float(rec["asn"]) if rec["asn"] else None,
        )
        for e in ESTIMATORS:
            if rec[f"bias_{e}"]:
                row.bias[e] = float(rec[f"bias_{e}"])
            if rec[f"rmse_{e}"]:
                row.rmse[e] = float(rec[f"rmse_{e}"])
        for mth, tag in zip(METHODS, _METHOD_TAGS):
            if rec[f"coverage_{tag}"]:
                row.coverage[mth] = float(rec[f"coverage_{tag}"])
            if rec[f"length_{tag}"]:
                row.length[mth] = float(rec[f"length_{tag}"])
        rows.append(row)
    return rows


def rows_to_plot_json(rows: list[PerformanceRow]) -> str:
    """Series grouped into panels by testing problem, one series per design."""
    if not rows:
        raise ValueError("no rows to serialize")
    panels: dict[str, dict[str, list[PerformanceRow]]] = {}
    for row in rows:
        panels.setdefault(row.hypotheses, {}).setdefault(row.design, []).append(row)
    doc = {"schema_version": 1, "panels": []}
    for hl in sorted(panels):
        panel = {"hypotheses": hl, "series": []}
        for design in sorted(panels[hl]):
            series_rows = sorted(panels[hl][design], key=lambda r: r.p_true)
            series = {
                "design": design,
                "mode": series_rows[0].mode,
                "p_true": [r.p_true for r in series_rows],
            }
            if all(r.power is not None for r in series_rows):
                series["power"] = [r.power for r in series_rows]
            if all(r.asn is not None for r in series_rows):
                series["asn"] = [r.asn for r in series_rows]
            for e in ESTIMATORS:
                if all(e in r.bias for r in series_rows):
                    series[f"bias_{e}"] = [r.bias[e] for r in series_rows]
                    series[f"rmse_{e}"] = [r.rmse[e] for r in series_rows]
            for mth, tag in zip(METHODS, _METHOD_TAGS):
                if all(mth in r.coverage for r in series_rows):
                    series[f"coverage_{tag}"] = [r.coverage[mth] for r in series_rows]
                    series[f"length_{tag}"] = [r.length[mth] for r in series_rows]
            panel["series"].append(series)
        doc["panels"].append(panel)
    return json.dumps(doc, indent=2, sort_keys=True)


def emit_results(rows: list[PerformanceRow], fmt: str, path: str) -> str:
    """Write rows to ``path`` as ``csv`` or ``plotjson``; returns the path."""
    if not rows:
        raise ValueError("no rows to emit")
    if fmt == "csv":
        payload = rows_to_csv(rows)
    elif fmt == "plotjson":
        payload = rows_to_plot_json(rows)
    else:
        raise ValueError(f"format must be 'csv' or 'plotjson', got {fmt!r}")
    try:
        with open(path, "w") as fh:
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path
