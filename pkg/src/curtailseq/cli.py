"""Command-line interface: design search, boundaries, operating
characteristics, estimation, interactive monitoring, simulation,
comparison, and the HTTP service runner.

Data goes to stdout, diagnostics to stderr.  Exit codes: 0 success,
2 invalid arguments, 1 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys

from .comparators import table2_csv
from .design import (
    Design,
    DesignSearchError,
    Hypotheses,
    StageDecision,
    classify_state,
    operating_characteristics,
    search_design,
)
from .distribution import build_distribution, exact_power, expected_sample_size
from .service import boundaries_payload, final_report
from .simulation import (
    ScenarioGrid,
    compare_designs,
    evaluate_estimation,
    evaluate_oc,
    rows_to_csv,
    rows_to_plot_json,
)


def _add_hypothesis_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--p0", type=float, required=True, help="null response rate")
    sub.add_argument("--p1", type=float, required=True, help="expected response rate")
    sub.add_argument("--alpha", type=float, default=0.025, help="one-sided type I level")
    sub.add_argument("--beta", type=float, default=0.2, help="type II level")


def _hypotheses(args) -> Hypotheses:
    return Hypotheses(args.p0, args.p1, args.alpha, args.beta)


def _design_from_args(args) -> Design:
    hyp = _hypotheses(args)
    if getattr(args, "u", None) is not None and getattr(args, "max_n", None) is not None:
        return operating_characteristics(args.u, args.max_n, hyp).design
    return search_design(hyp).design


def _print_table(headers: list[str], rows: list[list]) -> None:
    widths = [max(len(str(h)), *(len(str(r[i])) for r in rows)) if rows else len(str(h))
              for i, h in enumerate(headers)]
    print("  ".join(str(h).ljust(w) for h, w in zip(headers, widths)))
    for row in rows:
        print("  ".join(str(v).ljust(w) for v, w in zip(row, widths)))


def cmd_design(args) -> int:
    result = search_design(_hypotheses(args))
    doc = result.design.to_dict()
    doc["feasible_K"] = list(result.feasible_k)
    doc["K_max"] = result.k_max
    if args.format == "json":
        print(json.dumps(doc, indent=2))
    elif args.format == "csv":
        keys = ["p0", "p1", "alpha", "beta", "u", "K", "alpha_actual", "power", "K_max"]
        print(",".join(keys))
        print(",".join(repr(doc[k]) if isinstance(doc[k], float) else str(doc[k]) for k in keys))
    else:
        rows = [[k, doc[k]] for k in ("p0", "p1", "alpha", "beta", "u", "K",
                                      "alpha_actual", "power", "feasible_K", "K_max")]
        _print_table(["field", "value"], rows)
    return 0


def cmd_boundaries(args) -> int:
    hyp = _hypotheses(args)
    if args.format == "csv":
        sys.stdout.write(table2_csv(hyp))
        return 0
    design = search_design(hyp).design
    payload = boundaries_payload(design)
    if args.format == "json":
        print(json.dumps(payload, indent=2))
        return 0
    rows = [
        ["efficacy"] + [u if k >= design.u else "" for k, u in zip(payload["k"], payload["efficacy"])],
        ["futility"] + ["" if b is None else b for b in payload["futility"]],
    ]
    _print_table(["bound"] + [str(k) for k in payload["k"]], rows)
    return 0


def cmd_oc(args) -> int:
    design = _design_from_args(args)
    p_values = args.p if args.p else [args.p0, args.p1]
    dist = build_distribution(design)
    rows = [
        {"p": p, "stop_efficacy": exact_power(dist, p), "asn": expected_sample_size(dist, p)}
        for p in p_values
    ]
    if args.format == "json":
        print(json.dumps({"u": design.u, "K": design.K, "rows": rows}, indent=2))
    elif args.format == "csv":
        print("p,stop_efficacy,asn")
        for r in rows:
            print(f"{r['p']:g},{r['stop_efficacy']!r},{r['asn']!r}")
    else:
        _print_table(["p", "stop_efficacy", "asn"],
                     [[f"{r['p']:g}", f"{r['stop_efficacy']:.6f}", f"{r['asn']:.4f}"] for r in rows])
    return 0


def cmd_estimate(args) -> int:
    design = _design_from_args(args)
    report = final_report(design, args.m, args.s, args.alpha)
    if args.format == "json":
        print(json.dumps(report, indent=2))
    elif args.format == "csv":
        print("field,value")
        for key, value in report["estimates"].items():
            print(f"{key},{value}")
        for mth, iv in report["intervals"].items():
            print(f"{mth}_lower,{iv['lower']!r}")
            print(f"{mth}_upper,{iv['upper']!r}")
    else:
        rows = [[k, v] for k, v in report["estimates"].items()]
        rows += [[mth, f"({iv['lower']:.4f}, {iv['upper']:.4f})"]
                 for mth, iv in report["intervals"].items()]
        _print_table(["quantity", "value"], rows)
    return 0


def cmd_monitor(args) -> int:
    design = _design_from_args(args)
    print(f"monitoring with efficacy threshold u={design.u}, maximum size K={design.K}",
          file=sys.stderr)
    print("enter y (responder), n (non-responder), u (undo), q (quit)", file=sys.stderr)
    outcomes: list[bool] = []
    decision = StageDecision.CONTINUE
    for line in sys.stdin:
        token = line.strip().lower()
        if token in ("q", "quit"):
            break
        if token in ("u", "undo"):
            if outcomes:
                outcomes.pop()
                decision = StageDecision.CONTINUE
                print(f"undone; enrolled={len(outcomes)} responders={sum(outcomes)}")
            else:
                print("nothing to undo", file=sys.stderr)
            continue
        if token not in ("y", "n", "yes", "no"):
            print(f"unrecognized input {token!r}", file=sys.stderr)
            continue
        if decision is not StageDecision.CONTINUE:
            print("trial already stopped; undo or quit", file=sys.stderr)
            continue
        outcomes.append(token.startswith("y"))
        k, s = len(outcomes), sum(outcomes)
        decision = classify_state(design, k, s)
        needed = max(design.u - s, 0)
        print(f"patient {k}: responders={s} decision={decision.value} responders_needed={needed}")
        if decision is not StageDecision.CONTINUE:
            report = final_report(design, k, s, args.alpha)
            print(json.dumps(report, indent=2))
            break
    return 0


def _write_rows(rows, args) -> int:
    if args.format == "json":
        payload = rows_to_plot_json(rows)
    else:
        payload = rows_to_csv(rows)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(payload)
        print(f"wrote {args.out}", file=sys.stderr)
    else:
        sys.stdout.write(payload)
    return 0


def cmd_simulate(args) -> int:
    design = _design_from_args(args)
    p_values = args.p if args.p else list(ScenarioGrid.default().p_true)
    if args.measures == "estimation":
        rows = evaluate_estimation(design, p_values, mode=args.mode,
                                   n_rep=args.reps or 10_000, seed=args.seed)
    else:
        rows = evaluate_oc(design, p_values, mode=args.mode,
                           n_rep=args.reps or 100_000, seed=args.seed)
    if args.format == "table":
        _print_table(["p", "power", "asn"],
                     [[f"{r.p_true:g}", f"{r.power:.4f}", f"{r.asn:.4f}"] for r in rows])
        return 0
    return _write_rows(rows, args)


def cmd_compare(args) -> int:
    hyp = _hypotheses(args)
    p_values = args.p if args.p else list(ScenarioGrid.default().p_true)
    rows = compare_designs(hyp, p_values, mode=args.mode,
                           n_rep=args.reps or 100_000, seed=args.seed)
    if args.format == "table":
        _print_table(
            ["design", "p", "power", "asn"],
            [[r.design, f"{r.p_true:g}", f"{r.power:.4f}", f"{r.asn:.4f}"] for r in rows],
        )
        return 0
    return _write_rows(rows, args)


def cmd_serve(args) -> int:
    from .service import run_server

    run_server(host=args.host, port=args.port, data_dir=args.data_dir)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curtailseq",
        description="Exact sequential single-arm trial design with curtailed futility stopping",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="search the smallest feasible design")
    _add_hypothesis_flags(p_design)
    p_design.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p_design.set_defaults(func=cmd_design)

    p_bounds = sub.add_parser("boundaries", help="threshold table across enrollment")
    _add_hypothesis_flags(p_bounds)
    p_bounds.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p_bounds.set_defaults(func=cmd_boundaries)

    p_oc = sub.add_parser("oc", help="exact power and expected size at given rates")
    _add_hypothesis_flags(p_oc)
    p_oc.add_argument("--u", type=int, help="override the efficacy threshold")
    p_oc.add_argument("--max-n", type=int, dest="max_n", help="override the maximum size")
    p_oc.add_argument("--p", type=float, nargs="*", help="true rates to evaluate")
    p_oc.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p_oc.set_defaults(func=cmd_oc)

    p_est = sub.add_parser("estimate", help="estimates and intervals at a terminal state")
    _add_hypothesis_flags(p_est)
    p_est.add_argument("--u", type=int, help="override the efficacy threshold")
    p_est.add_argument("--max-n", type=int, dest="max_n", help="override the maximum size")
    p_est.add_argument("--m", type=int, required=True, help="enrollment at stop")
    p_est.add_argument("--s", type=int, required=True, help="responders at stop")
    p_est.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p_est.set_defaults(func=cmd_estimate)

    p_mon = sub.add_parser("monitor", help="interactive per-patient monitoring on stdin")
    _add_hypothesis_flags(p_mon)
    p_mon.add_argument("--u", type=int, help="override the efficacy threshold")
    p_mon.add_argument("--max-n", type=int, dest="max_n", help="override the maximum size")
    p_mon.set_defaults(func=cmd_monitor)

    p_sim = sub.add_parser("simulate", help="evaluate the design across true rates")
    _add_hypothesis_flags(p_sim)
    p_sim.add_argument("--u", type=int, help="override the efficacy threshold")
    p_sim.add_argument("--max-n", type=int, dest="max_n", help="override the maximum size")
    p_sim.add_argument("--p", type=float, nargs="*", help="true rates (default grid)")
    p_sim.add_argument("--mode", choices=["exact", "montecarlo"], default="exact")
    p_sim.add_argument("--measures", choices=["oc", "estimation"], default="oc")
    p_sim.add_argument("--reps", type=int, help="Monte Carlo replications")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", help="output file (stdout if omitted)")
    p_sim.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p_sim.set_defaults(func=cmd_simulate)

    p_cmp = sub.add_parser("compare", help="benchmark against fixed and two-stage designs")
    _add_hypothesis_flags(p_cmp)
    p_cmp.add_argument("--p", type=float, nargs="*", help="true rates (default grid)")
    p_cmp.add_argument("--mode", choices=["exact", "montecarlo"], default="exact")
    p_cmp.add_argument("--reps", type=int, help="Monte Carlo replications")
    p_cmp.add_argument("--seed", type=int, default=0)
    p_cmp.add_argument("--out", help="output file (stdout if omitted)")
    p_cmp.add_argument("--format", choices=["table", "csv", "json"], default="table")
    p_cmp.set_defaults(func=cmd_compare)

    p_srv = sub.add_parser("serve", help="run the monitoring HTTP service")
    p_srv.add_argument("--host", default=None)
    p_srv.add_argument("--port", type=int, default=None)
    p_srv.add_argument("--data-dir", default=None)
    p_srv.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except (ValueError, DesignSearchError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        return 0
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
